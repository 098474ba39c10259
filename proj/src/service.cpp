// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/service.hpp"

#include <chrono>
#include <iostream>

#include "httplib.h"
#include "spatrwd/backend.hpp"
#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

[[noreturn]] void Schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kSchemaViolation, where + ": " + what);
}

}  // namespace

ScoreRequest ParseScoreRequest(const Json& doc) {
  if (!doc.is_object()) Schema("$", "expected object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "schema_version" && key != "prompt" && key != "constraints" && key != "image" && key != "scene" &&
        key != "config" && key != "format") {
      Schema(key, "unknown field");
    }
  }
  if (auto v = doc.find("schema_version"); v != doc.end() && *v != 1) Schema("schema_version", "must be 1");
  ScoreRequest req;
  const bool has_prompt = doc.contains("prompt");
  if (has_prompt == doc.contains("constraints")) Schema("$", "exactly one of prompt or constraints is required");
  if (has_prompt) {
    if (!doc["prompt"].is_string()) Schema("prompt", "expected string");
    req.prompt = doc["prompt"].get<std::string>();
  } else {
    req.constraints = ParseConstraintSet(doc["constraints"], "constraints");
  }
  if (doc.contains("image")) req.image = ImageRef::FromJson(doc["image"], "image");
  if (doc.contains("scene")) req.scene = ParseSceneGraph(doc["scene"], "scene");
  if (doc.contains("config")) {
    if (!doc["config"].is_object()) Schema("config", "expected object");
    req.config = doc["config"];
  }
  if (doc.contains("format")) {
    auto format = doc["format"].is_string() ? ParseReportFormat(doc["format"].get<std::string>()) : std::nullopt;
    if (!format) Schema("format", "expected json or md");
    req.format = *format;
  }
  return req;
}

std::string ScoreAndRender(const ScoreRequest& request, const EngineConfig& config, PerceptionBackend& backend,
                           bool* verdict) {
  const ScoreReport report = request.constraints ? ScoreImage(*request.constraints, request.image, backend, config)
                                                 : ScoreImage(*request.prompt, request.image, backend, config);
  if (verdict != nullptr) *verdict = report.verdict;
  return RenderScoreReport(report, request.format);
}

int HttpStatus(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchemaViolation:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kUnrecognizedTemplate:
    case ErrorKind::kDanglingRelationId:
    case ErrorKind::kEmptyManifest:
      return 400;
    case ErrorKind::kNotImplemented:
    case ErrorKind::kUnsupportedRelation:
    case ErrorKind::kMissingDepth:
    case ErrorKind::kInfeasiblePlant:
      return 422;
    case ErrorKind::kBackendUnavailable:
    case ErrorKind::kMalformedResponse:
    case ErrorKind::kUnparseableScore:
      return 502;
  }
  return 500;
}

Json ErrorJson(const Error& error) {
  Json body;
  body["kind"] = std::string(ToString(error.kind()));
  body["message"] = error.detail();
  if (!error.stage().empty()) body["stage"] = error.stage();
  if (error.kind() == ErrorKind::kSchemaViolation) {
    const auto colon = error.detail().find(": ");
    if (colon != std::string::npos) body["path"] = error.detail().substr(0, colon);
  }
  return Json{{"error", body}};
}

struct ScoringService::Server {
  httplib::Server http;
};

ScoringService::ScoringService(Settings settings, std::shared_ptr<PerceptionBackend> backend)
    : settings_(std::move(settings)), backend_(std::move(backend)), server_(std::make_unique<Server>()) {}

ScoringService::~ScoringService() { Stop(); }

HttpReply ScoringService::Score(const std::string& body) const {
  try {
    Json doc;
    try {
      doc = Json::parse(body);
    } catch (const Json::parse_error& e) {
      Schema("$", std::string("invalid JSON: ") + e.what());
    }
    const ScoreRequest request = ParseScoreRequest(doc);
    Settings settings = settings_;
    if (request.config) {
      ApplyConfigJson(settings, *request.config, "config");
      ValidateSettings(settings);
    }
    std::shared_ptr<PerceptionBackend> backend = backend_;
    if (request.scene) backend = FixtureBackend(*request.scene, settings.engine.relation);
    if (!backend) throw Error(ErrorKind::kBackendUnavailable, "no backend configured and no scene in request");
    HttpReply reply;
    reply.body = ScoreAndRender(request, settings.engine, *backend);
    if (request.format == ReportFormat::kMarkdown) reply.content_type = "text/markdown";
    return reply;
  } catch (const Error& e) {
    return {HttpStatus(e.kind()), WriteJson(ErrorJson(e)) + "\n", "application/json"};
  } catch (const std::exception& e) {
    return {500, WriteJson(ErrorJson(Error(ErrorKind::kBackendUnavailable, e.what()))) + "\n", "application/json"};
  }
}

HttpReply ScoringService::Health() const {
  Json out;
  out["ok"] = true;
  out["schema_version"] = 1;
  out["protocol_version"] = kProtocolVersion;
  out["backend"] = backend_ && backend_->handshake_done() ? "ready" : "unavailable";
  if (backend_) out["backend_description"] = backend_->Describe();
  return {200, WriteJson(out) + "\n", "application/json"};
}

HttpReply ScoringService::Config() const {
  Json out;
  out["schema_version"] = 1;
  out["config"] = settings_.ToJson();
  return {200, WriteJson(out) + "\n", "application/json"};
}

int ScoringService::Bind(const std::string& host, int port) {
  auto& http = server_->http;
  const int threads = settings_.max_concurrent_requests;
  http.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  auto respond = [this](const httplib::Request& req, httplib::Response& res, const HttpReply& reply,
                        std::chrono::steady_clock::time_point start) {
    std::string id = req.get_header_value("X-Request-Id");
    if (id.empty()) id = "req-" + std::to_string(next_request_.fetch_add(1));
    res.status = reply.status;
    res.set_header("X-Request-Id", id);
    res.set_content(reply.body, reply.content_type);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    std::lock_guard lock(log_mutex_);
    std::cerr << "spatrwd serve: " << id << " " << req.method << " " << req.path << " " << reply.status << " "
              << ms << "ms\n";
  };
  http.Post("/v1/score", [this, respond](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    respond(req, res, Score(req.body), start);
  });
  http.Get("/v1/health", [this, respond](const httplib::Request& req, httplib::Response& res) {
    respond(req, res, Health(), std::chrono::steady_clock::now());
  });
  http.Get("/v1/config", [this, respond](const httplib::Request& req, httplib::Response& res) {
    respond(req, res, Config(), std::chrono::steady_clock::now());
  });
  if (port == 0) return http.bind_to_any_port(host);
  return http.bind_to_port(host, port) ? port : -1;
}

void ScoringService::Serve() { server_->http.listen_after_bind(); }

void ScoringService::Stop() {
  if (server_) server_->http.stop();
}

struct FixtureHttpServer::Server {
  httplib::Server http;
};

FixtureHttpServer::FixtureHttpServer(std::shared_ptr<const FixtureServer> fixture)
    : fixture_(std::move(fixture)), server_(std::make_unique<Server>()) {}

FixtureHttpServer::~FixtureHttpServer() { Stop(); }

int FixtureHttpServer::Bind(const std::string& host, int port) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(fixture_->HandleLine(req.body), "application/json");
  };
  server_->http.Post("/v1/handshake", handler);
  for (std::string_view method : kMethods) server_->http.Post(MethodPath(method), handler);
  if (port == 0) return server_->http.bind_to_any_port(host);
  return server_->http.bind_to_port(host, port) ? port : -1;
}

void FixtureHttpServer::Serve() { server_->http.listen_after_bind(); }

void FixtureHttpServer::Stop() {
  if (server_) server_->http.stop();
}

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "spatrwd/config.hpp"
#include "spatrwd/engine.hpp"
#include "spatrwd/error.hpp"
#include "spatrwd/fixture.hpp"
#include "spatrwd/report.hpp"

namespace spatrwd {

// Body of POST /v1/score:
//   {"prompt": "..."} or {"constraints": ConstraintSet}
//   "image":  "path" | {"path": ...} | {"b64": ...}     (optional)
//   "scene":  SceneGraph, scored with an in-process fixture (optional)
//   "config": partial config, same fields as a config file (optional)
//   "format": "json" | "md"                             (optional)
struct ScoreRequest {
  std::optional<std::string> prompt;
  std::optional<ConstraintSet> constraints;
  ImageRef image;
  std::optional<SceneGraph> scene;
  std::optional<Json> config;
  ReportFormat format = ReportFormat::kJson;
};

ScoreRequest ParseScoreRequest(const Json& doc);

// Scores and renders exactly as `spatrwd score` does.
std::string ScoreAndRender(const ScoreRequest& request, const EngineConfig& config, PerceptionBackend& backend,
                           bool* verdict = nullptr);

// HTTP status for an error kind: 400 for bad input, 422 for capabilities the
// backend lacks, 502 for backend faults.
int HttpStatus(ErrorKind kind);
Json ErrorJson(const Error& error);

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class ScoringService {
 public:
  // `backend` serves requests without an inline scene and may be null.
  ScoringService(Settings settings, std::shared_ptr<PerceptionBackend> backend);
  ~ScoringService();
  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  HttpReply Score(const std::string& body) const;
  HttpReply Health() const;
  HttpReply Config() const;

  // Returns the bound port, or -1. port 0 picks a free one.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Serve();
  void Stop();

 private:
  struct Server;
  Settings settings_;
  std::shared_ptr<PerceptionBackend> backend_;
  std::unique_ptr<Server> server_;
  mutable std::atomic<std::uint64_t> next_request_{1};
  mutable std::mutex log_mutex_;
};

// Serves a FixtureServer over HTTP: each protocol method is POSTed to
// /v1/<method> as one request line.
class FixtureHttpServer {
 public:
  explicit FixtureHttpServer(std::shared_ptr<const FixtureServer> fixture);
  ~FixtureHttpServer();
  FixtureHttpServer(const FixtureHttpServer&) = delete;
  FixtureHttpServer& operator=(const FixtureHttpServer&) = delete;

  int Bind(const std::string& host, int port);
  void Serve();
  void Stop();

 private:
  struct Server;
  std::shared_ptr<const FixtureServer> fixture_;
  std::unique_ptr<Server> server_;
};

}  // namespace spatrwd

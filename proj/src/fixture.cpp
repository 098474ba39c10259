// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/fixture.hpp"

#include <iostream>
#include <sstream>

#include "spatrwd/decompose.hpp"
#include "spatrwd/error.hpp"
#include "spatrwd/unicode_text.hpp"

namespace spatrwd {
namespace {

double Iou(const BBox& a, const BBox& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::string CategoryKey(std::string_view s) { return text::CollapseWhitespace(text::Lower(s)); }

const Json& Param(const Json& params, std::string_view key) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw Error(ErrorKind::kSchemaViolation, "params." + std::string(key) + ": missing");
  }
  return *it;
}

}  // namespace

const SceneObject* ResolveBox(const SceneGraph& scene, const BBox& box) {
  const SceneObject* best = nullptr;
  double best_iou = 0.0;
  for (const auto& o : scene.objects) {
    const double iou = Iou(o.box, box);
    if (iou > best_iou) {
      best_iou = iou;
      best = &o;
    }
  }
  return best;
}

FixtureServer::FixtureServer(SceneGraph scene, CotResponder fallback, Concurrency concurrency)
    : scene_(std::move(scene)), fallback_(std::move(fallback)), concurrency_(concurrency) {}

const SceneObject& FixtureServer::Resolve(const Json& box_value, std::string_view path) const {
  const BBox box = BoxFromJson(box_value, path);
  const SceneObject* best = ResolveBox(scene_, box);
  if (best == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, std::string(path) + ": box " + ToString(box) +
                                                 " overlaps no scene object");
  }
  return *best;
}

Json FixtureServer::Dispatch(const std::string& method, const Json& params) const {
  if (method == "handshake") {
    Json methods = Json::array();
    for (auto m : kMethods) methods.push_back(std::string(m));
    return Json{{"protocol_version", kProtocolVersion},
                {"concurrency", concurrency_ == Concurrency::kSingle ? "single" : "parallel"},
                {"methods", methods}};
  }
  if (method == "detect") {
    const Json& category = Param(params, "category");
    if (!category.is_string()) throw Error(ErrorKind::kSchemaViolation, "params.category: expected string");
    const std::string key = CategoryKey(category.get<std::string>());
    Json list = Json::array();
    for (const auto& o : scene_.objects) {
      if (CategoryKey(o.category) != key) continue;
      list.push_back(Json{{"category", o.category}, {"box", BoxToJson(o.box)}, {"confidence", 1.0}});
    }
    return Json{{"detections", list}};
  }
  if (method == "ocr") {
    Json list = Json::array();
    for (const auto& t : scene_.texts) {
      list.push_back(Json{{"text", t.text}, {"box", BoxToJson(t.box)}, {"confidence", 1.0}});
    }
    return Json{{"texts", list}};
  }
  if (method == "depth") {
    const Json& boxes = Param(params, "boxes");
    if (!boxes.is_array()) throw Error(ErrorKind::kSchemaViolation, "params.boxes: expected array");
    Json depths = Json::array();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      depths.push_back(Resolve(boxes[i], "params.boxes[" + std::to_string(i) + "]").depth);
    }
    return Json{{"depths", depths}};
  }
  if (method == "orientation") {
    return Json{{"degrees", Resolve(Param(params, "box"), "params.box").orientation_degrees}};
  }
  if (method == "color") {
    return Json{{"color", Resolve(Param(params, "box"), "params.box").color}};
  }
  if (method == "decompose") {
    const Json& prompt = Param(params, "prompt");
    if (!prompt.is_string()) throw Error(ErrorKind::kSchemaViolation, "params.prompt: expected string");
    return Json{{"constraints", ToJson(DecomposeTemplate(prompt.get<std::string>()))}};
  }
  if (method == "cot") {
    const Json& payload = Param(params, "payload");
    if (payload.is_object() && payload.contains("relation") && payload.contains("boxes")) {
      const Json& rel = payload["relation"];
      const std::string relation =
          rel.is_object() && rel.contains("name") && rel["name"].is_string() ? rel["name"].get<std::string>() : "";
      const Json& boxes = payload["boxes"];
      if (boxes.is_object() && boxes.contains("subject") && boxes.contains("object")) {
        const SceneObject& subject = Resolve(boxes["subject"], "params.payload.boxes.subject");
        const SceneObject& object = Resolve(boxes["object"], "params.payload.boxes.object");
        for (const auto& fact : scene_.facts) {
          if (fact.relation == relation && fact.subject == subject.id && fact.object == object.id) {
            std::ostringstream why;
            why << "planted " << relation << "(" << subject.id << ", " << object.id << ")";
            return Json{{"reasoning", why.str()}, {"score", fact.score}};
          }
        }
      }
    }
    if (!fallback_) throw Error(ErrorKind::kNotImplemented, "no planted fact answers this query");
    const CotReply reply = fallback_(payload);
    return Json{{"reasoning", reply.reasoning}, {"score", reply.score}};
  }
  throw Error(ErrorKind::kNotImplemented, "unknown method \"" + method + "\"");
}

Response FixtureServer::Handle(const Request& request) const {
  Response resp;
  resp.id = request.id;
  try {
    resp.body = Dispatch(request.method, request.params);
  } catch (const Error& e) {
    resp.ok = false;
    resp.body = ErrorBody(ToString(e.kind()), e.detail());
  }
  return resp;
}

std::string FixtureServer::HandleLine(const std::string& line) const {
  Request request;
  try {
    request = DecodeRequest(line);
  } catch (const Error& e) {
    Response resp;
    resp.ok = false;
    resp.body = ErrorBody(ToString(e.kind()), e.detail());
    // Salvage the id when the line is valid JSON so the client can correlate.
    try {
      Json doc = Json::parse(line);
      if (doc.is_object() && doc.contains("id") && doc["id"].is_string()) resp.id = doc["id"];
    } catch (const Json::parse_error&) {
    }
    return EncodeResponse(resp);
  }
  return EncodeResponse(Handle(request));
}

std::shared_ptr<PerceptionBackend> OracleAdapter(std::shared_ptr<FixtureServer> server) {
  auto transport = std::make_shared<LoopbackTransport>(
      [server](const std::string& line) { return server->HandleLine(line); }, "fixture");
  return std::make_shared<PerceptionBackend>(std::move(transport));
}

std::shared_ptr<PerceptionBackend> OracleAdapter(SceneGraph scene, CotResponder fallback) {
  return OracleAdapter(std::make_shared<FixtureServer>(std::move(scene), std::move(fallback)));
}

void ServeNdjson(const FixtureServer& server, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << server.HandleLine(line) << '\n';
    out.flush();
  }
}

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "spatrwd/error.hpp"
#include "spatrwd/unicode_text.hpp"

namespace spatrwd {
namespace {

[[noreturn]] void Malformed(std::string_view path, std::string_view what) {
  throw Error(ErrorKind::kMalformedResponse, std::string(path) + ": " + std::string(what));
}

[[noreturn]] void SceneSchema(std::string_view path, std::string_view what) {
  throw Error(ErrorKind::kSchemaViolation, std::string(path) + ": " + std::string(what));
}

std::string At(std::string_view base, std::string_view key) {
  if (base.empty()) return std::string(key);
  return std::string(base) + "." + std::string(key);
}

std::string Index(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

const Json& Field(const Json& obj, std::string_view key, std::string_view path) {
  if (!obj.is_object()) Malformed(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) Malformed(At(path, key), "missing field");
  return *it;
}

double Confidence(const Json& v, std::string_view path) {
  if (!v.is_number()) Malformed(path, "expected number");
  const double c = v.get<double>();
  if (!std::isfinite(c) || c < 0.0 || c > 1.0) Malformed(path, "confidence outside [0, 1]");
  return c;
}

BBox WireBox(const Json& v, std::string_view path) {
  try {
    return BoxFromJson(v, path);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedResponse, e.detail());
  }
}

template <typename T>
auto SortKey(const T& d) {
  return std::make_tuple(-d.confidence, d.box.x0, d.box.y0, d.box.x1, d.box.y1);
}

}  // namespace

Json ImageRef::ToJson() const {
  switch (kind) {
    case Kind::kPath: return Json{{"path", value}};
    case Kind::kBase64: return Json{{"b64", value}};
    case Kind::kNone: break;
  }
  return Json::object();
}

ImageRef ImageRef::FromJson(const Json& value, std::string_view path) {
  if (value.is_string()) return Path(value.get<std::string>());
  if (!value.is_object()) SceneSchema(path, "expected {\"path\": ...} or {\"b64\": ...}");
  for (const auto& [key, _] : value.items()) {
    if (key != "path" && key != "b64") SceneSchema(At(path, key), "unknown field");
  }
  if (auto it = value.find("path"); it != value.end() && it->is_string()) {
    return Path(it->get<std::string>());
  }
  if (auto it = value.find("b64"); it != value.end() && it->is_string()) {
    return Base64(it->get<std::string>());
  }
  if (value.empty()) return {};
  SceneSchema(path, "expected a string path or b64 payload");
}

void SortDetections(std::vector<Detection>& detections) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) { return SortKey(a) < SortKey(b); });
}

void SortDetections(std::vector<TextDetection>& detections) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const TextDetection& a, const TextDetection& b) {
                     return SortKey(a) < SortKey(b);
                   });
}

// ---------------------------------------------------------------------------
// SceneGraph

const SceneObject* SceneGraph::FindObject(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

Json ToJson(const SceneGraph& scene) {
  Json out;
  out["schema_version"] = 1;
  out["seed"] = scene.seed;
  out["objects"] = Json::array();
  for (const auto& o : scene.objects) {
    out["objects"].push_back({{"id", o.id},
                              {"category", o.category},
                              {"box", BoxToJson(o.box)},
                              {"color", o.color},
                              {"orientation", o.orientation_degrees},
                              {"depth", o.depth}});
  }
  out["texts"] = Json::array();
  for (const auto& t : scene.texts) {
    out["texts"].push_back({{"text", t.text}, {"box", BoxToJson(t.box)}});
  }
  if (!scene.facts.empty()) {
    out["facts"] = Json::array();
    for (const auto& f : scene.facts) {
      out["facts"].push_back(
          {{"relation", f.relation}, {"subject", f.subject}, {"object", f.object}, {"score", f.score}});
    }
  }
  return out;
}

std::string Serialize(const SceneGraph& scene) { return ToJson(scene).dump(); }

SceneGraph ParseSceneGraph(const Json& doc, std::string_view path) {
  const std::string base(path);
  auto require = [&](const Json& obj, std::string_view key, std::string_view at) -> const Json& {
    auto it = obj.find(key);
    if (it == obj.end()) SceneSchema(At(at, key), "missing required field");
    return *it;
  };
  auto reject_unknown = [&](const Json& obj, std::string_view at,
                            std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        SceneSchema(At(at, key), "unknown field");
      }
    }
  };
  auto string_field = [&](const Json& obj, std::string_view key, std::string_view at) {
    const Json& v = require(obj, key, at);
    if (!v.is_string()) SceneSchema(At(at, key), "expected string");
    return v.get<std::string>();
  };
  auto number_field = [&](const Json& obj, std::string_view key, std::string_view at) {
    const Json& v = require(obj, key, at);
    if (!v.is_number()) SceneSchema(At(at, key), "expected number");
    return v.get<double>();
  };
  auto box_field = [&](const Json& obj, std::string_view at) {
    return BoxFromJson(require(obj, "box", at), At(at, "box"));
  };

  if (!doc.is_object()) SceneSchema(base.empty() ? "$" : base, "expected object");
  reject_unknown(doc, base, {"schema_version", "seed", "objects", "texts", "facts"});
  SceneGraph scene;
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer()) SceneSchema(At(base, "seed"), "expected integer");
    scene.seed = it->get<std::uint64_t>();
  }
  std::set<std::string, std::less<>> ids;
  const Json& objects = require(doc, "objects", base);
  if (!objects.is_array()) SceneSchema(At(base, "objects"), "expected array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string at = Index(At(base, "objects"), i);
    const Json& o = objects[i];
    if (!o.is_object()) SceneSchema(at, "expected object");
    reject_unknown(o, at, {"id", "category", "box", "color", "orientation", "depth"});
    SceneObject obj;
    obj.id = string_field(o, "id", at);
    if (!ids.insert(obj.id).second) SceneSchema(At(at, "id"), "duplicate object id");
    obj.category = string_field(o, "category", at);
    obj.box = box_field(o, at);
    const std::string color = string_field(o, "color", at);
    auto normalized = NormalizeColor(color);
    if (!normalized) SceneSchema(At(at, "color"), "not in the color vocabulary");
    obj.color = *normalized;
    obj.orientation_degrees = number_field(o, "orientation", at);
    if (obj.orientation_degrees < 0.0 || obj.orientation_degrees >= 360.0) {
      SceneSchema(At(at, "orientation"), "must lie in [0, 360)");
    }
    obj.depth = number_field(o, "depth", at);
    if (!(obj.depth > 0.0) || !std::isfinite(obj.depth)) {
      SceneSchema(At(at, "depth"), "must be strictly positive");
    }
    scene.objects.push_back(std::move(obj));
  }
  if (auto it = doc.find("texts"); it != doc.end()) {
    if (!it->is_array()) SceneSchema(At(base, "texts"), "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string at = Index(At(base, "texts"), i);
      const Json& t = (*it)[i];
      if (!t.is_object()) SceneSchema(at, "expected object");
      reject_unknown(t, at, {"text", "box"});
      SceneText st{string_field(t, "text", at), box_field(t, at)};
      if (st.text.empty()) SceneSchema(At(at, "text"), "must be non-empty");
      scene.texts.push_back(std::move(st));
    }
  }
  if (auto it = doc.find("facts"); it != doc.end()) {
    if (!it->is_array()) SceneSchema(At(base, "facts"), "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string at = Index(At(base, "facts"), i);
      const Json& f = (*it)[i];
      if (!f.is_object()) SceneSchema(at, "expected object");
      reject_unknown(f, at, {"relation", "subject", "object", "score"});
      SceneFact fact{string_field(f, "relation", at), string_field(f, "subject", at),
                     string_field(f, "object", at), number_field(f, "score", at)};
      if (!ids.contains(fact.subject)) SceneSchema(At(at, "subject"), "unknown object id");
      if (!ids.contains(fact.object)) SceneSchema(At(at, "object"), "unknown object id");
      if (fact.score < 0.0 || fact.score > 1.0) SceneSchema(At(at, "score"), "outside [0, 1]");
      scene.facts.push_back(std::move(fact));
    }
  }
  return scene;
}

SceneGraph LoadSceneGraph(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open scene file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchemaViolation, file + ": invalid JSON: " + e.what());
  }
  return ParseSceneGraph(doc);
}

// ---------------------------------------------------------------------------
// Envelope codec

std::string EncodeRequest(const Request& request) {
  Json out;
  out["method"] = request.method;
  out["id"] = request.id;
  out["params"] = request.params;
  return out.dump();
}

Request DecodeRequest(std::string_view line) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("$: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kSchemaViolation, "$: expected object");
  Request r;
  auto method = doc.find("method");
  auto id = doc.find("id");
  if (method == doc.end() || !method->is_string()) {
    throw Error(ErrorKind::kSchemaViolation, "method: expected string");
  }
  if (id == doc.end() || !id->is_string()) {
    throw Error(ErrorKind::kSchemaViolation, "id: expected string");
  }
  r.method = method->get<std::string>();
  r.id = id->get<std::string>();
  if (auto params = doc.find("params"); params != doc.end()) {
    if (!params->is_object()) throw Error(ErrorKind::kSchemaViolation, "params: expected object");
    r.params = *params;
  }
  return r;
}

std::string EncodeResponse(const Response& response) {
  Json out;
  out["id"] = response.id;
  out["ok"] = response.ok;
  out[response.ok ? "result" : "error"] = response.body;
  return out.dump();
}

Response DecodeResponse(std::string_view line) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    Malformed("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) Malformed("$", "expected object");
  Response r;
  const Json& id = Field(doc, "id", "");
  if (!id.is_string()) Malformed("id", "expected string");
  r.id = id.get<std::string>();
  const Json& ok = Field(doc, "ok", "");
  if (!ok.is_boolean()) Malformed("ok", "expected boolean");
  r.ok = ok.get<bool>();
  const char* key = r.ok ? "result" : "error";
  const Json& body = Field(doc, key, "");
  if (!body.is_object()) Malformed(key, "expected object");
  r.body = body;
  return r;
}

Json ErrorBody(std::string_view kind, std::string_view message) {
  return Json{{"kind", std::string(kind)}, {"message", std::string(message)}};
}

std::string MethodPath(std::string_view method) { return "/v1/" + std::string(method); }

// ---------------------------------------------------------------------------
// Client

PerceptionBackend::PerceptionBackend(std::shared_ptr<Transport> transport)
    : transport_(std::move(transport)) {}

Json PerceptionBackend::Exchange(std::string_view method, Json params) {
  Request req;
  req.method = std::string(method);
  req.id = std::to_string(next_id_.fetch_add(1));
  req.params = std::move(params);
  std::string reply;
  {
    std::unique_lock<std::mutex> lock(flight_mutex_, std::defer_lock);
    if (single_flight_.load()) lock.lock();
    reply = transport_->RoundTrip(EncodeRequest(req), method);
  }
  Response resp = DecodeResponse(reply);
  if (resp.id != req.id) Malformed("id", "reply id \"" + resp.id + "\" does not match \"" + req.id + "\"");
  if (!resp.ok) {
    std::string kind = "BackendUnavailable";
    std::string message = "backend error";
    if (auto k = resp.body.find("kind"); k != resp.body.end() && k->is_string()) kind = *k;
    if (auto m = resp.body.find("message"); m != resp.body.end() && m->is_string()) message = *m;
    for (ErrorKind candidate :
         {ErrorKind::kNotImplemented, ErrorKind::kUnrecognizedTemplate, ErrorKind::kSchemaViolation,
          ErrorKind::kInvalidArgument, ErrorKind::kUnparseableScore, ErrorKind::kMissingDepth,
          ErrorKind::kUnsupportedRelation}) {
      if (ToString(candidate) == kind) throw Error(candidate, std::string(method) + ": " + message);
    }
    throw Error(ErrorKind::kBackendUnavailable, std::string(method) + ": " + kind + ": " + message);
  }
  return resp.body;
}

Handshake PerceptionBackend::EnsureHandshake() {
  std::lock_guard<std::mutex> lock(handshake_mutex_);
  if (handshake_done_.load()) return handshake_;
  const Json result = Exchange("handshake", Json{{"protocol_version", kProtocolVersion}});
  const Json& version = Field(result, "protocol_version", "result");
  if (!version.is_number_integer()) Malformed("result.protocol_version", "expected integer");
  if (version.get<int>() != kProtocolVersion) {
    throw Error(ErrorKind::kBackendUnavailable,
                "protocol version " + version.dump() + " is not supported");
  }
  Handshake hs;
  const Json& concurrency = Field(result, "concurrency", "result");
  if (concurrency == "single") {
    hs.concurrency = Concurrency::kSingle;
  } else if (concurrency == "parallel") {
    hs.concurrency = Concurrency::kParallel;
  } else {
    Malformed("result.concurrency", "expected \"single\" or \"parallel\"");
  }
  if (auto methods = result.find("methods"); methods != result.end() && methods->is_array()) {
    for (const auto& m : *methods) {
      if (m.is_string()) hs.methods.push_back(m.get<std::string>());
    }
  }
  single_flight_.store(hs.concurrency == Concurrency::kSingle);
  handshake_ = hs;
  handshake_done_.store(true);
  return handshake_;
}

Json PerceptionBackend::Call(std::string_view method, Json params) {
  EnsureHandshake();
  return Exchange(method, std::move(params));
}

std::vector<Detection> PerceptionBackend::DetectObjects(const ImageRef& image,
                                                        std::string_view category,
                                                        double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "detection threshold must lie in [0, 1]");
  }
  const Json result = Call("detect", Json{{"image", image.ToJson()},
                                          {"category", std::string(category)},
                                          {"threshold", threshold}});
  const Json& list = Field(result, "detections", "result");
  if (!list.is_array()) Malformed("result.detections", "expected array");
  std::vector<Detection> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = Index("result.detections", i);
    const Json& cat = Field(list[i], "category", at);
    if (!cat.is_string()) Malformed(At(at, "category"), "expected string");
    Detection d{cat.get<std::string>(), WireBox(Field(list[i], "box", at), At(at, "box")),
                Confidence(Field(list[i], "confidence", at), At(at, "confidence"))};
    if (d.confidence >= threshold) out.push_back(std::move(d));
  }
  SortDetections(out);
  return out;
}

std::vector<TextDetection> PerceptionBackend::RecognizeText(const ImageRef& image) {
  const Json result = Call("ocr", Json{{"image", image.ToJson()}});
  const Json& list = Field(result, "texts", "result");
  if (!list.is_array()) Malformed("result.texts", "expected array");
  std::vector<TextDetection> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = Index("result.texts", i);
    const Json& t = Field(list[i], "text", at);
    if (!t.is_string() || t.get<std::string>().empty()) Malformed(At(at, "text"), "expected non-empty string");
    out.push_back({t.get<std::string>(), WireBox(Field(list[i], "box", at), At(at, "box")),
                   Confidence(Field(list[i], "confidence", at), At(at, "confidence"))});
  }
  SortDetections(out);
  return out;
}

std::vector<double> PerceptionBackend::EstimateDepth(const ImageRef& image,
                                                     std::span<const BBox> boxes) {
  if (boxes.empty()) return {};
  Json wire_boxes = Json::array();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    RequireValid(boxes[i], Index("boxes", i));
    wire_boxes.push_back(BoxToJson(boxes[i]));
  }
  const Json result = Call("depth", Json{{"image", image.ToJson()}, {"boxes", wire_boxes}});
  const Json& list = Field(result, "depths", "result");
  if (!list.is_array()) Malformed("result.depths", "expected array");
  if (list.size() != boxes.size()) Malformed("result.depths", "one depth per box expected");
  std::vector<double> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_number()) Malformed(Index("result.depths", i), "expected number");
    const double d = list[i].get<double>();
    if (!std::isfinite(d) || d <= 0.0) Malformed(Index("result.depths", i), "depth must be positive");
    out.push_back(d);
  }
  return out;
}

double PerceptionBackend::ClassifyOrientation(const ImageRef& image, const BBox& box) {
  RequireValid(box, "box");
  const Json result = Call("orientation", Json{{"image", image.ToJson()}, {"box", BoxToJson(box)}});
  const Json& deg = Field(result, "degrees", "result");
  if (!deg.is_number() || !std::isfinite(deg.get<double>())) {
    Malformed("result.degrees", "expected finite number");
  }
  double d = std::fmod(deg.get<double>(), 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;
  return d;
}

std::string PerceptionBackend::ClassifyColor(const ImageRef& image, const BBox& box,
                                             std::string_view category) {
  RequireValid(box, "box");
  const Json result = Call("color", Json{{"image", image.ToJson()},
                                         {"box", BoxToJson(box)},
                                         {"category", std::string(category)}});
  const Json& color = Field(result, "color", "result");
  if (!color.is_string()) Malformed("result.color", "expected string");
  auto normalized = NormalizeColor(color.get<std::string>());
  if (!normalized) Malformed("result.color", "\"" + color.get<std::string>() + "\" is not a vocabulary color");
  return *normalized;
}

ConstraintSet PerceptionBackend::Decompose(std::string_view prompt) {
  const Json result = Call("decompose", Json{{"prompt", std::string(prompt)}});
  try {
    return ParseConstraintSet(Field(result, "constraints", "result"), "result.constraints");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kMalformedResponse) throw;
    throw Error(ErrorKind::kMalformedResponse, e.detail());
  }
}

CotReply ParseCotReply(const Json& result) {
  if (!result.is_object()) Malformed("result", "expected object");
  CotReply reply;
  if (auto r = result.find("reasoning"); r != result.end() && r->is_string()) {
    reply.reasoning = r->get<std::string>();
  }
  auto s = result.find("score");
  if (s == result.end()) throw Error(ErrorKind::kUnparseableScore, "result.score: missing");
  double score = 0.0;
  if (s->is_number()) {
    score = s->get<double>();
  } else if (s->is_string()) {
    const std::string text = text::CollapseWhitespace(s->get<std::string>());
    char* end = nullptr;
    score = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
      throw Error(ErrorKind::kUnparseableScore, "result.score: \"" + text + "\" is not a number");
    }
  } else {
    throw Error(ErrorKind::kUnparseableScore, "result.score: expected number");
  }
  if (!std::isfinite(score)) throw Error(ErrorKind::kUnparseableScore, "result.score: not finite");
  if (score < 0.0 || score > 1.0) {
    reply.clamped = true;
    score = std::clamp(score, 0.0, 1.0);
  }
  reply.score = score;
  return reply;
}

CotReply PerceptionBackend::CotScore(const Json& payload) {
  return ParseCotReply(Call("cot", Json{{"payload", payload}}));
}

std::vector<std::string> ReadLines(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + file);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace spatrwd

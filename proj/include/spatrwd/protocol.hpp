// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatrwd/constraint.hpp"
#include "spatrwd/geometry.hpp"
#include "spatrwd/json_format.hpp"

namespace spatrwd {

inline constexpr int kProtocolVersion = 1;

// File path or inline base64 image. Fixture backends ignore the bytes.
struct ImageRef {
  enum class Kind { kNone, kPath, kBase64 };
  Kind kind = Kind::kNone;
  std::string value;

  static ImageRef Path(std::string path) { return {Kind::kPath, std::move(path)}; }
  static ImageRef Base64(std::string data) { return {Kind::kBase64, std::move(data)}; }

  Json ToJson() const;
  static ImageRef FromJson(const Json& value, std::string_view path);
};

struct Detection {
  std::string category;
  BBox box;
  double confidence = 0.0;
};

struct TextDetection {
  std::string text;
  BBox box;
  double confidence = 0.0;
};

// Orders by confidence descending, then x0, then y0 (then the remaining
// coordinates so the order is total).
void SortDetections(std::vector<Detection>& detections);
void SortDetections(std::vector<TextDetection>& detections);

enum class Concurrency { kSingle, kParallel };

struct Handshake {
  int protocol_version = kProtocolVersion;
  Concurrency concurrency = Concurrency::kParallel;
  std::vector<std::string> methods;
};

struct CotReply {
  std::string reasoning;
  double score = 0.0;
  bool clamped = false;  // the backend replied outside [0, 1]
};

// ---------------------------------------------------------------------------
// Ground-truth scene used by the fixture backend.

struct SceneObject {
  std::string id;
  std::string category;
  BBox box;
  std::string color;
  double orientation_degrees = 0.0;
  double depth = 1.0;  // larger is farther
};

struct SceneText {
  std::string text;
  BBox box;
};

// Planted truth for relations the geometric rules cannot decide; the fixture
// CoT method answers from these.
struct SceneFact {
  std::string relation;
  std::string subject;  // object id
  std::string object;   // object id
  double score = 0.0;
};

struct SceneGraph {
  std::vector<SceneObject> objects;
  std::vector<SceneText> texts;
  std::vector<SceneFact> facts;
  std::uint64_t seed = 0;

  const SceneObject* FindObject(std::string_view id) const;
};

Json ToJson(const SceneGraph& scene);
std::string Serialize(const SceneGraph& scene);
SceneGraph ParseSceneGraph(const Json& doc, std::string_view path = "");
SceneGraph LoadSceneGraph(const std::string& file);

// ---------------------------------------------------------------------------
// Wire format: one JSON object per line.

struct Request {
  std::string method;
  std::string id;
  Json params = Json::object();
};

struct Response {
  std::string id;
  bool ok = true;
  Json body = Json::object();  // "result" when ok, "error" otherwise
};

std::string EncodeRequest(const Request& request);
Request DecodeRequest(std::string_view line);
std::string EncodeResponse(const Response& response);
Response DecodeResponse(std::string_view line);
Json ErrorBody(std::string_view kind, std::string_view message);

// HTTP path for a protocol method, e.g. "detect" -> "/v1/detect".
std::string MethodPath(std::string_view method);

inline constexpr std::string_view kMethods[] = {"detect", "ocr",       "depth", "orientation",
                                                "color",  "decompose", "cot"};

// Moves one encoded request line to a backend and returns the reply line.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string RoundTrip(const std::string& request_line, std::string_view method) = 0;
  virtual std::string Describe() const = 0;
};

// Typed client over a transport. Performs the handshake lazily on first use
// and serializes requests when the backend declares single-flight.
// Response validation failures raise kMalformedResponse with a field path.
class PerceptionBackend {
 public:
  explicit PerceptionBackend(std::shared_ptr<Transport> transport);

  Handshake EnsureHandshake();
  bool handshake_done() const { return handshake_done_.load(); }
  std::string Describe() const { return transport_->Describe(); }

  std::vector<Detection> DetectObjects(const ImageRef& image, std::string_view category,
                                       double threshold);
  std::vector<TextDetection> RecognizeText(const ImageRef& image);
  std::vector<double> EstimateDepth(const ImageRef& image, std::span<const BBox> boxes);
  double ClassifyOrientation(const ImageRef& image, const BBox& box);
  std::string ClassifyColor(const ImageRef& image, const BBox& box, std::string_view category);
  ConstraintSet Decompose(std::string_view prompt);
  CotReply CotScore(const Json& payload);

 private:
  Json Call(std::string_view method, Json params);
  Json Exchange(std::string_view method, Json params);

  std::shared_ptr<Transport> transport_;
  std::mutex handshake_mutex_;
  std::mutex flight_mutex_;
  std::atomic<bool> handshake_done_{false};
  std::atomic<bool> single_flight_{false};
  std::atomic<std::uint64_t> next_id_{1};
  Handshake handshake_;
};

// Parses the "score" field of a CoT reply: numbers, or numeric strings
// ("1.0"); out-of-range values are clamped to [0, 1] and flagged.
CotReply ParseCotReply(const Json& result);

// ---------------------------------------------------------------------------
// Transports.

// Byte-level loopback to an in-process handler (used by the fixture adapter).
class LoopbackTransport final : public Transport {
 public:
  using Handler = std::function<std::string(const std::string&)>;
  LoopbackTransport(Handler handler, std::string description);
  std::string RoundTrip(const std::string& request_line, std::string_view method) override;
  std::string Describe() const override { return description_; }

 private:
  Handler handler_;
  std::string description_;
};

// Newline-delimited JSON over the stdin/stdout of a child started with
// /bin/sh -c <command>. One round trip at a time.
class ChildProcessTransport final : public Transport {
 public:
  explicit ChildProcessTransport(std::string command);
  ~ChildProcessTransport() override;
  ChildProcessTransport(const ChildProcessTransport&) = delete;
  ChildProcessTransport& operator=(const ChildProcessTransport&) = delete;

  std::string RoundTrip(const std::string& request_line, std::string_view method) override;
  std::string Describe() const override { return "cmd:" + command_; }

 private:
  void Start();
  std::string command_;
  std::mutex mutex_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// POSTs each request line to <base_url><MethodPath(method)>.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url, int timeout_seconds = 60);
  std::string RoundTrip(const std::string& request_line, std::string_view method) override;
  std::string Describe() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  int timeout_seconds_;
};

// Replays paired .req.jsonl / .resp.jsonl transcripts. Each incoming request
// must equal the next recorded one apart from its id; the recorded reply is
// returned with the live id substituted.
class ReplayTransport final : public Transport {
 public:
  ReplayTransport(std::vector<std::string> requests, std::vector<std::string> responses);
  static std::shared_ptr<ReplayTransport> FromFiles(const std::string& request_file,
                                                    const std::string& response_file);
  std::string RoundTrip(const std::string& request_line, std::string_view method) override;
  std::string Describe() const override { return "replay"; }
  std::size_t remaining() const;

 private:
  std::vector<std::string> requests_;
  std::vector<std::string> responses_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
};

std::vector<std::string> ReadLines(const std::string& file);

}  // namespace spatrwd

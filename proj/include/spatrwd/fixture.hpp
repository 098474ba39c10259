// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "spatrwd/protocol.hpp"

namespace spatrwd {

// Answers CoT requests that no planted fact covers.
using CotResponder = std::function<CotReply(const Json& payload)>;

// Scene object with the highest IoU against `box`, or null when none overlaps.
const SceneObject* ResolveBox(const SceneGraph& scene, const BBox& box);

// Deterministic backend that answers every protocol method from a SceneGraph.
// Detections carry confidence 1.0; per-box methods resolve the box to the
// scene object with the highest IoU.
class FixtureServer {
 public:
  explicit FixtureServer(SceneGraph scene, CotResponder fallback = {},
                         Concurrency concurrency = Concurrency::kParallel);

  Response Handle(const Request& request) const;
  // Decodes, handles and encodes one wire line. Never throws.
  std::string HandleLine(const std::string& line) const;

  const SceneGraph& scene() const { return scene_; }
  void set_fallback(CotResponder fallback) { fallback_ = std::move(fallback); }

 private:
  Json Dispatch(const std::string& method, const Json& params) const;
  const SceneObject& Resolve(const Json& box_value, std::string_view path) const;

  SceneGraph scene_;
  CotResponder fallback_;
  Concurrency concurrency_;
};

// Typed client wired to a FixtureServer through the wire codec.
std::shared_ptr<PerceptionBackend> OracleAdapter(std::shared_ptr<FixtureServer> server);
std::shared_ptr<PerceptionBackend> OracleAdapter(SceneGraph scene, CotResponder fallback = {});

// Serves a FixtureServer as NDJSON until `in` reaches EOF.
void ServeNdjson(const FixtureServer& server, std::istream& in, std::ostream& out);

}  // namespace spatrwd

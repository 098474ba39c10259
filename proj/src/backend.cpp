// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/backend.hpp"

#include "spatrwd/error.hpp"
#include "spatrwd/fixture.hpp"

namespace spatrwd {

std::shared_ptr<PerceptionBackend> FixtureBackend(SceneGraph scene, const RelationConfig& rules) {
  CotResponder fallback = GeometricCotResponder(scene, rules);
  return OracleAdapter(std::move(scene), std::move(fallback));
}

std::shared_ptr<PerceptionBackend> MakeBackend(std::string_view spec, const RelationConfig& rules) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos || colon + 1 == spec.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "backend must be fixture:SCENE, cmd:EXEC or http:URL, got \"" + std::string(spec) + "\"");
  }
  const std::string_view scheme = spec.substr(0, colon);
  const std::string rest(spec.substr(colon + 1));
  if (scheme == "fixture") return FixtureBackend(LoadSceneGraph(rest), rules);
  if (scheme == "cmd") return std::make_shared<PerceptionBackend>(std::make_shared<ChildProcessTransport>(rest));
  // http:URL keeps the scheme inside the URL, as in http:http://host:port.
  if (scheme == "http") {
    const std::string url = rest.rfind("//", 0) == 0 ? "http:" + rest : rest;
    return std::make_shared<PerceptionBackend>(std::make_shared<HttpTransport>(url));
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown backend scheme \"" + std::string(scheme) + "\"");
}

}  // namespace spatrwd

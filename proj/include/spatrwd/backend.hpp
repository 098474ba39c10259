// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "spatrwd/engine.hpp"
#include "spatrwd/protocol.hpp"

namespace spatrwd {

// In-process fixture over `scene`. CoT requests without a planted fact are
// answered by the geometric decision table under `rules`.
std::shared_ptr<PerceptionBackend> FixtureBackend(SceneGraph scene, const RelationConfig& rules);

// Builds a backend from "fixture:SCENE_FILE", "cmd:COMMAND" or "http:URL".
std::shared_ptr<PerceptionBackend> MakeBackend(std::string_view spec, const RelationConfig& rules);

}  // namespace spatrwd

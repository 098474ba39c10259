// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spatrwd/constraint.hpp"
#include "spatrwd/protocol.hpp"
#include "spatrwd/relations.hpp"
#include "spatrwd/subrewards.hpp"

namespace spatrwd {

enum class RelationPath { kGeometric, kCot };
std::string_view ToString(RelationPath path);
std::optional<RelationPath> ParseRelationPath(std::string_view name);  // "geo" | "cot"

struct EngineConfig {
  double detection_threshold = 0.30;
  double pass_threshold = 0.8;
  double orientation_tolerance_cat8 = 45.0;
  double orientation_tolerance_cont = 22.5;
  RelationPath relation_path = RelationPath::kGeometric;
  RelationConfig relation;

  double OrientationTolerance(OrientationMode mode) const;
  Json ToJson() const;
};

struct RelationVerdict {
  RelationSpec relation;
  double score = 0.0;
  RelationPath path = RelationPath::kGeometric;
  std::optional<BBox> subject_box;
  std::optional<BBox> object_box;
  std::optional<std::string> reasoning;  // set on the CoT path
  bool clamped = false;
};

enum class Role { kInclusion, kExclusion };

struct ConstraintResult {
  std::string entity_id;
  std::string category;
  Role role = Role::kInclusion;
  SubRewardVector facets;
  std::optional<RelationVerdict> relation;
  double composed = 0.0;
  // Inclusions pass at composed >= tau_pass; exclusions pass below it.
  bool pass = false;
};

struct ScoreReport {
  ConstraintSet constraints;
  std::string decomposer;  // "template", "backend" or "given"
  std::vector<ConstraintResult> per_constraint;  // inclusions, then exclusions
  double raw_total = 0.0;
  double exclusion_penalty = 0.0;
  double normalized_total = 0.0;
  bool verdict = false;
  EngineConfig config;

  // Ids of constraints that did not pass.
  std::vector<std::string> Failures() const;
};

// Template grammar first, then the backend's decompose method.
ConstraintSet ResolveConstraints(std::string_view prompt, PerceptionBackend& backend,
                                 std::string* decomposer = nullptr);

ScoreReport ScoreImage(const ConstraintSet& constraints, const ImageRef& image,
                       PerceptionBackend& backend, const EngineConfig& config);
ScoreReport ScoreImage(std::string_view prompt, const ImageRef& image, PerceptionBackend& backend,
                       const EngineConfig& config);

// raw = sum(inclusions) - each exclusion in turn; normalized per the clamp rule.
void AggregateTotals(ScoreReport& report);

}  // namespace spatrwd

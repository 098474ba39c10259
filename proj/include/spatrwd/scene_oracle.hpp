// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spatrwd/constraint.hpp"
#include "spatrwd/engine.hpp"
#include "spatrwd/protocol.hpp"
#include "spatrwd/subrewards.hpp"

namespace spatrwd {

struct Violation {
  std::string entity_id;
  Facet facet = Facet::kPresence;
  friend bool operator==(const Violation&, const Violation&) = default;
};

// A presence "violation" on an exclusion plants the excluded configuration;
// exclusions are absent otherwise.
struct PlantSpec {
  ConstraintSet constraint_set;
  std::vector<Violation> violations;
  std::uint64_t seed = 0;
};

Json ToJson(const PlantSpec& spec);
std::string Serialize(const PlantSpec& spec);
PlantSpec ParsePlantSpec(const Json& doc, std::string_view path = "");

struct ExpectedConstraint {
  std::string entity_id;
  Role role = Role::kInclusion;
  double composed = 0.0;
  bool pass = false;
};

struct PlantResult {
  SceneGraph scene;
  std::vector<ExpectedConstraint> expected;  // inclusions, then exclusions
  double raw_total = 0.0;
  double normalized_total = 0.0;
  bool verdict = false;
};

// Builds a scene that satisfies every facet not listed in `spec.violations`
// and violates each listed one, with every geometric quantity at least twice
// as far from its decision threshold as the engine requires. Raises
// kInfeasiblePlant when no such layout exists or the request is inconsistent.
PlantResult PlantScene(const PlantSpec& spec, const EngineConfig& config = {});

struct TagWeight {
  Tag tag;
  double weight;
};

// The five benchmark dimensions plus five GenEval-style tags, equally weighted.
std::vector<TagWeight> DefaultTagMix();

// Counts per tag by largest remainder over the weights; ties go to the
// earlier entry.
std::vector<std::pair<Tag, int>> StratifiedCounts(int n, const std::vector<TagWeight>& mix);

// n template-rendered specs stratified over `mix`, reproducible in `seed`.
// Specs whose plant is infeasible or whose expected normalized total lies
// within 0.01 of tau_pass are redrawn.
std::vector<PlantSpec> RandomSuite(int n, std::uint64_t seed, const std::vector<TagWeight>& mix,
                                   const EngineConfig& config = {});

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "spatrwd/constraint.hpp"
#include "spatrwd/fixture.hpp"
#include "spatrwd/geometry.hpp"
#include "spatrwd/protocol.hpp"
#include "spatrwd/subrewards.hpp"

namespace spatrwd {

struct RelationConfig {
  // Directional margin, as a fraction of the mean diagonal of the two boxes.
  double position_margin = 0.05;
  double on_gap = 0.05;          // fraction of height(B)
  double on_overlap = 0.3;       // fraction of min(width(A), width(B))
  double inside_ioa = 0.9;
  double next_to_distance = 1.0; // multiple of the mean diagonal
  double depth_epsilon = 0.02;   // fraction of the largest depth

  Json ToJson() const;
};

struct DepthPair {
  double subject = 0.0;
  double object = 0.0;
  double max_depth = 0.0;  // largest depth among the estimated boxes
};

// Binary verdict of `kind`(A, B) under the decision table. Depth relations
// need `depths` (kMissingDepth otherwise); kOther raises kUnsupportedRelation.
double EvaluateRelationGeometric(RelationKind kind, const BBox& a, const BBox& b,
                                 const std::optional<DepthPair>& depths, const RelationConfig& config);

// {"relation", "boxes", "attributes", "image"} in that order. Attributes list
// only the facets present in each vector. Missing boxes raise kInvalidArgument.
Json BuildCotPayload(const RelationSpec& relation, std::string_view subject_category,
                     std::string_view object_category, const std::optional<BBox>& subject,
                     const std::optional<BBox>& object, const SubRewardVector& subject_facets,
                     const SubRewardVector& object_facets, const ImageRef& image);

// CoT stand-in that applies the decision table to the payload boxes, with
// depths read from `scene`. Used when the CoT path is forced on canonical
// relations under the fixture backend.
CotResponder GeometricCotResponder(SceneGraph scene, RelationConfig config);

}  // namespace spatrwd

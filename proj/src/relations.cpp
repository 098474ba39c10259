// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/relations.hpp"

#include <algorithm>
#include <cmath>

#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

double HorizontalOverlap(const BBox& a, const BBox& b) {
  return std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
}

bool Directional(RelationKind kind, const BBox& a, const BBox& b, double margin) {
  const double dx = b.cx() - a.cx();
  const double dy = b.cy() - a.cy();
  const double ax = std::fabs(dx);
  const double ay = std::fabs(dy);
  switch (kind) {
    case RelationKind::kLeftOf: return dx > 0 && ax > ay && ax > margin;
    case RelationKind::kRightOf: return dx < 0 && ax > ay && ax > margin;
    case RelationKind::kAbove: return dy > 0 && ay > ax && ay > margin;
    case RelationKind::kBelow: return dy < 0 && ay > ax && ay > margin;
    default: return false;
  }
}

}  // namespace

Json RelationConfig::ToJson() const {
  return Json{{"position_margin", position_margin}, {"on_gap", on_gap},
              {"on_overlap", on_overlap},           {"inside_ioa", inside_ioa},
              {"next_to_distance", next_to_distance}, {"depth_epsilon", depth_epsilon}};
}

double EvaluateRelationGeometric(RelationKind kind, const BBox& a, const BBox& b,
                                 const std::optional<DepthPair>& depths, const RelationConfig& config) {
  RequireValid(a, "subject");
  RequireValid(b, "object");
  const double mean_diagonal = (a.diagonal() + b.diagonal()) / 2.0;
  const double margin = config.position_margin * mean_diagonal;
  switch (kind) {
    case RelationKind::kLeftOf:
    case RelationKind::kRightOf:
    case RelationKind::kAbove:
    case RelationKind::kBelow:
      return Directional(kind, a, b, margin) ? 1.0 : 0.0;
    case RelationKind::kOn: {
      const bool adjacent = std::fabs(a.y1 - b.y0) <= config.on_gap * b.height();
      const bool overlapping =
          HorizontalOverlap(a, b) >= config.on_overlap * std::min(a.width(), b.width());
      return adjacent && overlapping && a.cy() < b.cy() ? 1.0 : 0.0;
    }
    case RelationKind::kInside:
      return Ioa(a, b) >= config.inside_ioa ? 1.0 : 0.0;
    case RelationKind::kNextTo: {
      const bool close = CenterDistance(a, b) <= config.next_to_distance * mean_diagonal;
      const bool contained = Ioa(a, b) >= config.inside_ioa || Ioa(b, a) >= config.inside_ioa;
      const bool stacked = Directional(RelationKind::kAbove, a, b, margin) ||
                           Directional(RelationKind::kBelow, a, b, margin);
      return close && !contained && !stacked ? 1.0 : 0.0;
    }
    case RelationKind::kBehind:
    case RelationKind::kInFrontOf: {
      if (!depths) {
        throw Error(ErrorKind::kMissingDepth,
                    std::string(ToString(kind)) + " needs depth estimates for both boxes");
      }
      const double eps = config.depth_epsilon * depths->max_depth;
      if (kind == RelationKind::kBehind) return depths->subject > depths->object + eps ? 1.0 : 0.0;
      return depths->subject < depths->object - eps ? 1.0 : 0.0;
    }
    case RelationKind::kOther: break;
  }
  throw Error(ErrorKind::kUnsupportedRelation, "no geometric rule for this relation");
}

Json BuildCotPayload(const RelationSpec& relation, std::string_view subject_category,
                     std::string_view object_category, const std::optional<BBox>& subject,
                     const std::optional<BBox>& object, const SubRewardVector& subject_facets,
                     const SubRewardVector& object_facets, const ImageRef& image) {
  if (!subject) throw Error(ErrorKind::kInvalidArgument, "CoT payload needs a subject box");
  if (!object) throw Error(ErrorKind::kInvalidArgument, "CoT payload needs an object box");
  Json payload;
  payload["relation"] = Json{{"name", relation.Name()},
                             {"subject", std::string(subject_category)},
                             {"object", std::string(object_category)}};
  payload["boxes"] = Json{{"subject", BoxToJson(*subject)}, {"object", BoxToJson(*object)}};
  payload["attributes"] =
      Json{{"subject", subject_facets.ToJson()}, {"object", object_facets.ToJson()}};
  payload["image"] = image.ToJson();
  return payload;
}

CotResponder GeometricCotResponder(SceneGraph scene, RelationConfig config) {
  return [scene = std::move(scene), config](const Json& payload) -> CotReply {
    if (!payload.is_object() || !payload.contains("relation") || !payload.contains("boxes")) {
      throw Error(ErrorKind::kSchemaViolation, "payload: expected relation and boxes");
    }
    const Json& rel = payload["relation"];
    if (!rel.is_object() || !rel.contains("name") || !rel["name"].is_string()) {
      throw Error(ErrorKind::kSchemaViolation, "payload.relation.name: expected string");
    }
    const RelationSpec spec = MakeRelation(rel["name"].get<std::string>(), "a", "b");
    const BBox a = BoxFromJson(payload["boxes"].value("subject", Json()), "payload.boxes.subject");
    const BBox b = BoxFromJson(payload["boxes"].value("object", Json()), "payload.boxes.object");
    std::optional<DepthPair> depths;
    if (IsDepthRelation(spec.kind)) {
      const SceneObject* sa = ResolveBox(scene, a);
      const SceneObject* sb = ResolveBox(scene, b);
      if (sa == nullptr || sb == nullptr) {
        throw Error(ErrorKind::kMissingDepth, "payload boxes do not match scene objects");
      }
      DepthPair pair{sa->depth, sb->depth, std::max(sa->depth, sb->depth)};
      depths = pair;
    }
    const double score = EvaluateRelationGeometric(spec.kind, a, b, depths, config);
    return CotReply{"decision table: " + spec.Name() + " = " + (score > 0.0 ? "1" : "0"), score, false};
  };
}

}  // namespace spatrwd

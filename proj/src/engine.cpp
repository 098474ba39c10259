// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spatrwd/binding.hpp"
#include "spatrwd/decompose.hpp"
#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

template <typename F>
auto Staged(std::string_view stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.WithStage(std::string(stage));
  }
}

struct CategoryData {
  std::vector<Detection> detections;
  std::vector<std::string> colors;    // filled only when a color target exists
  std::vector<double> orientations;   // filled only when an orientation target exists
};

using CategoryMap = std::map<std::string, CategoryData, std::less<>>;

struct Scorer {
  const ConstraintSet& set;
  const ImageRef& image;
  PerceptionBackend& backend;
  const EngineConfig& config;

  CategoryMap categories;
  std::vector<TextDetection> texts;

  std::vector<const AtomicConstraint*> AllConstraints() const {
    std::vector<const AtomicConstraint*> all;
    for (const auto& c : set.inclusions) all.push_back(&c);
    for (const auto& c : set.exclusions) all.push_back(&c);
    return all;
  }

  void Perceive() {
    const auto all = AllConstraints();
    bool need_text = false;
    for (const auto* c : all) {
      if (categories.contains(c->category)) continue;
      categories[c->category].detections = Staged("detect", [&] {
        return backend.DetectObjects(image, c->category, config.detection_threshold);
      });
    }
    for (auto& [category, data] : categories) {
      bool need_color = false;
      bool need_orientation = false;
      for (const auto* c : all) {
        if (c->category != category) continue;
        need_color |= c->color.has_value();
        need_orientation |= c->orientation.has_value();
      }
      for (const auto& d : data.detections) {
        if (need_color) {
          data.colors.push_back(Staged("color", [&] { return backend.ClassifyColor(image, d.box, category); }));
        }
        if (need_orientation) {
          data.orientations.push_back(
              Staged("orientation", [&] { return backend.ClassifyOrientation(image, d.box); }));
        }
      }
    }
    for (const auto* c : all) need_text |= c->text.has_value();
    if (need_text) texts = Staged("ocr", [&] { return backend.RecognizeText(image); });
  }

  // Product of the facets that depend on which box the entity is bound to.
  double BoxFacets(const AtomicConstraint& c, const CategoryData& data, std::size_t j,
                   SubRewardVector* out) const {
    double score = 1.0;
    if (c.color) {
      const double v = ColorReward(data.colors[j], *c.color);
      if (out) out->color = v;
      score *= v;
    }
    if (c.orientation) {
      const double v = OrientationReward(data.orientations[j], c.orientation->degrees,
                                         config.OrientationTolerance(c.orientation->mode));
      if (out) out->orientation = v;
      score *= v;
    }
    if (c.text) {
      const double v = TextReward(*c.text, data.detections[j].box, texts);
      if (out) out->text = v;
      score *= v;
    }
    return score;
  }

  // Per constraint, the index of its bound detection within its category.
  std::vector<std::optional<std::size_t>> Bind(const std::vector<AtomicConstraint>& list) const {
    std::vector<std::optional<std::size_t>> bound(list.size());
    std::vector<std::string> order;
    for (const auto& c : list) {
      if (std::find(order.begin(), order.end(), c.category) == order.end()) order.push_back(c.category);
    }
    for (const auto& category : order) {
      const CategoryData& data = categories.find(category)->second;
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].category == category) rows.push_back(i);
      }
      std::vector<std::vector<double>> scores(rows.size(), std::vector<double>(data.detections.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < data.detections.size(); ++j) {
          scores[r][j] = BoxFacets(list[rows[r]], data, j, nullptr);
        }
      }
      const Assignment assignment = MaxWeightAssignment(scores);
      for (std::size_t r = 0; r < rows.size(); ++r) bound[rows[r]] = assignment[r];
    }
    return bound;
  }
};

struct BoxLess {
  bool operator()(const BBox& a, const BBox& b) const {
    return std::tie(a.x0, a.y0, a.x1, a.y1) < std::tie(b.x0, b.y0, b.x1, b.y1);
  }
};

}  // namespace

std::string_view ToString(RelationPath path) {
  return path == RelationPath::kCot ? "cot" : "geo";
}

std::optional<RelationPath> ParseRelationPath(std::string_view name) {
  if (name == "geo" || name == "geometric") return RelationPath::kGeometric;
  if (name == "cot") return RelationPath::kCot;
  return std::nullopt;
}

double EngineConfig::OrientationTolerance(OrientationMode mode) const {
  return mode == OrientationMode::kContinuous ? orientation_tolerance_cont : orientation_tolerance_cat8;
}

Json EngineConfig::ToJson() const {
  Json out;
  out["tau_det"] = detection_threshold;
  out["tau_pass"] = pass_threshold;
  out["orientation_tolerance"] = Json{{"cat8", orientation_tolerance_cat8}, {"cont", orientation_tolerance_cont}};
  out["relations"] = std::string(ToString(relation_path));
  out["relation_rules"] = relation.ToJson();
  return out;
}

std::vector<std::string> ScoreReport::Failures() const {
  std::vector<std::string> out;
  for (const auto& r : per_constraint) {
    if (!r.pass) out.push_back(r.entity_id);
  }
  return out;
}

ConstraintSet ResolveConstraints(std::string_view prompt, PerceptionBackend& backend,
                                 std::string* decomposer) {
  return Staged("decompose", [&] {
    try {
      ConstraintSet set = DecomposeTemplate(prompt);
      if (decomposer) *decomposer = "template";
      return set;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kUnrecognizedTemplate) throw;
      try {
        ConstraintSet set = backend.Decompose(prompt);
        if (decomposer) *decomposer = "backend";
        return set;
      } catch (const Error& inner) {
        // A backend without a decomposer leaves the template error standing.
        if (inner.kind() == ErrorKind::kNotImplemented) throw e;
        throw;
      }
    }
  });
}

void AggregateTotals(ScoreReport& report) {
  double raw = 0.0;
  double penalty = 0.0;
  std::size_t n_inclusions = 0;
  for (const auto& r : report.per_constraint) {
    if (r.role == Role::kInclusion) {
      raw += r.composed;
      ++n_inclusions;
    }
  }
  for (const auto& r : report.per_constraint) {
    if (r.role == Role::kExclusion) {
      raw -= r.composed;
      penalty += r.composed;
    }
  }
  report.raw_total = raw;
  report.exclusion_penalty = penalty;
  report.normalized_total =
      std::clamp(raw / static_cast<double>(std::max<std::size_t>(1, n_inclusions)), 0.0, 1.0);
  report.verdict = report.normalized_total >= report.config.pass_threshold;
}

ScoreReport ScoreImage(const ConstraintSet& constraints, const ImageRef& image,
                       PerceptionBackend& backend, const EngineConfig& config) {
  const ConstraintSet set = Staged("constraints", [&] {
    Validate(constraints);
    ConstraintSet canonical = Canonicalize(constraints);
    Validate(canonical);
    return canonical;
  });

  Scorer scorer{set, image, backend, config, {}, {}};
  scorer.Perceive();
  const auto inc_bound = scorer.Bind(set.inclusions);
  const auto exc_bound = scorer.Bind(set.exclusions);

  ScoreReport report;
  report.constraints = set;
  report.config = config;

  struct Entity {
    const AtomicConstraint* constraint;
    std::optional<BBox> box;
    std::size_t result_index;
  };
  std::map<std::string, Entity, std::less<>> entities;

  auto facets_for = [&](const std::vector<AtomicConstraint>& list,
                        const std::vector<std::optional<std::size_t>>& bound, Role role) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const AtomicConstraint& c = list[i];
      const CategoryData& data = scorer.categories.find(c.category)->second;
      ConstraintResult r;
      r.entity_id = c.id;
      r.category = c.category;
      r.role = role;
      const std::size_t n = data.detections.size();
      r.facets.presence = PresenceReward(n);
      if (c.count) r.facets.count = CountReward(n, *c.count);
      if (bound[i]) {
        r.facets.bound_box = data.detections[*bound[i]].box;
        scorer.BoxFacets(c, data, *bound[i], &r.facets);
      } else {
        if (c.color) r.facets.color = 0.0;
        if (c.orientation) r.facets.orientation = 0.0;
        if (c.text) r.facets.text = 0.0;
      }
      entities[c.id] = Entity{&c, r.facets.bound_box, report.per_constraint.size()};
      report.per_constraint.push_back(std::move(r));
    }
  };
  facets_for(set.inclusions, inc_bound, Role::kInclusion);
  facets_for(set.exclusions, exc_bound, Role::kExclusion);

  // Depth estimates for every bound box with a depth target or taking part in
  // a geometric depth relation, in one request.
  std::vector<BBox> depth_boxes;
  auto want_depth = [&](const std::optional<BBox>& box) {
    if (box && std::find(depth_boxes.begin(), depth_boxes.end(), *box) == depth_boxes.end()) {
      depth_boxes.push_back(*box);
    }
  };
  for (const auto& r : report.per_constraint) {
    const AtomicConstraint& c = *entities.at(r.entity_id).constraint;
    if (c.depth_rank) want_depth(r.facets.bound_box);
    if (c.relation && IsDepthRelation(c.relation->kind) && config.relation_path == RelationPath::kGeometric) {
      want_depth(entities.at(c.relation->subject_id).box);
      want_depth(entities.at(c.relation->object_id).box);
    }
  }
  std::map<BBox, double, BoxLess> depth_of;
  double max_depth = 0.0;
  if (!depth_boxes.empty()) {
    const std::vector<double> depths =
        Staged("depth", [&] { return backend.EstimateDepth(image, depth_boxes); });
    for (std::size_t i = 0; i < depth_boxes.size(); ++i) {
      depth_of[depth_boxes[i]] = depths[i];
      max_depth = std::max(max_depth, depths[i]);
    }
  }

  // Depth ranks within each role among the bound entities that carry a target.
  for (Role role : {Role::kInclusion, Role::kExclusion}) {
    std::vector<std::size_t> pool;
    std::vector<double> depths;
    std::vector<double> x0;
    for (std::size_t i = 0; i < report.per_constraint.size(); ++i) {
      const auto& r = report.per_constraint[i];
      if (r.role != role || !entities.at(r.entity_id).constraint->depth_rank) continue;
      if (!r.facets.bound_box) continue;
      pool.push_back(i);
      depths.push_back(depth_of.at(*r.facets.bound_box));
      x0.push_back(r.facets.bound_box->x0);
    }
    const std::vector<int> ranks = DepthRanks(depths, x0);
    for (std::size_t k = 0; k < pool.size(); ++k) {
      auto& r = report.per_constraint[pool[k]];
      r.facets.depth = DepthReward(ranks[k], *entities.at(r.entity_id).constraint->depth_rank);
    }
    const int unbound_rank = static_cast<int>(pool.size()) + 1;
    for (auto& r : report.per_constraint) {
      const auto* c = entities.at(r.entity_id).constraint;
      if (r.role == role && c->depth_rank && !r.facets.bound_box) {
        r.facets.depth = DepthReward(unbound_rank, *c->depth_rank);
      }
    }
  }

  for (auto& r : report.per_constraint) {
    const AtomicConstraint& c = *entities.at(r.entity_id).constraint;
    if (!c.relation) continue;
    const Entity& subject = entities.at(c.relation->subject_id);
    const Entity& object = entities.at(c.relation->object_id);
    RelationVerdict v;
    v.relation = *c.relation;
    v.path = c.relation->kind == RelationKind::kOther || config.relation_path == RelationPath::kCot
                 ? RelationPath::kCot
                 : RelationPath::kGeometric;
    v.subject_box = subject.box;
    v.object_box = object.box;
    if (!subject.box || !object.box) {
      v.score = 0.0;
      if (v.path == RelationPath::kCot) v.reasoning = "subject or object not detected; backend not consulted";
    } else if (v.path == RelationPath::kGeometric) {
      std::optional<DepthPair> depths;
      if (IsDepthRelation(c.relation->kind)) {
        depths = DepthPair{depth_of.at(*subject.box), depth_of.at(*object.box), max_depth};
      }
      v.score = Staged("relation", [&] {
        return EvaluateRelationGeometric(c.relation->kind, *subject.box, *object.box, depths, config.relation);
      });
    } else {
      const Json payload = Staged("relation", [&] {
        return BuildCotPayload(*c.relation, subject.constraint->category, object.constraint->category,
                               subject.box, object.box,
                               report.per_constraint[subject.result_index].facets,
                               report.per_constraint[object.result_index].facets, image);
      });
      const CotReply reply = Staged("cot", [&] { return backend.CotScore(payload); });
      v.score = reply.score;
      v.reasoning = reply.reasoning;
      v.clamped = reply.clamped;
    }
    r.relation = std::move(v);
  }

  for (auto& r : report.per_constraint) {
    r.composed = ComposeScore(r.facets, r.relation ? std::optional<double>(r.relation->score) : std::nullopt);
    r.pass = r.role == Role::kInclusion ? r.composed >= config.pass_threshold
                                        : r.composed < config.pass_threshold;
  }
  AggregateTotals(report);
  report.decomposer = "given";
  return report;
}

ScoreReport ScoreImage(std::string_view prompt, const ImageRef& image, PerceptionBackend& backend,
                       const EngineConfig& config) {
  std::string decomposer;
  const ConstraintSet set = ResolveConstraints(prompt, backend, &decomposer);
  ScoreReport report = ScoreImage(set, image, backend, config);
  report.decomposer = decomposer;
  return report;
}

}  // namespace spatrwd

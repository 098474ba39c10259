// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/scene_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "spatrwd/decompose.hpp"
#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

[[noreturn]] void Infeasible(const std::string& what) {
  throw Error(ErrorKind::kInfeasiblePlant, what);
}

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform doubles from raw mt19937_64 bits, so streams match across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double Uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  bool Chance(double p) { return Uniform() < p; }
  template <typename T>
  const T& Pick(const std::vector<T>& v) {
    return v[Index(v.size())];
  }

 private:
  std::mt19937_64 gen_;
};

double Round4(double v) { return std::round(v * 1e4) / 1e4; }

BBox Rounded(const BBox& b) { return {Round4(b.x0), Round4(b.y0), Round4(b.x1), Round4(b.y1)}; }

BBox Centered(double cx, double cy, double w, double h) {
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

bool InUnitSquare(const BBox& b) {
  return b.x0 >= 0.0 && b.y0 >= 0.0 && b.x1 <= 1.0 && b.y1 <= 1.0 && b.x0 < b.x1 && b.y0 < b.y1;
}

double Diagonal(const BBox& b) { return std::hypot(b.x1 - b.x0, b.y1 - b.y0); }

bool Contains(const BBox& outer, const BBox& inner) {
  return inner.x0 >= outer.x0 && inner.y0 >= outer.y0 && inner.x1 <= outer.x1 && inner.y1 <= outer.y1;
}

double Overlap1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double Area(const BBox& b) { return (b.x1 - b.x0) * (b.y1 - b.y0); }

double Intersection(const BBox& a, const BBox& b) {
  return Overlap1d(a.x0, a.x1, b.x0, b.x1) * Overlap1d(a.y0, a.y1, b.y0, b.y1);
}

double Containment(const BBox& a, const BBox& b) { return Intersection(a, b) / Area(a); }

RelationKind Opposite(RelationKind k) {
  switch (k) {
    case RelationKind::kLeftOf: return RelationKind::kRightOf;
    case RelationKind::kRightOf: return RelationKind::kLeftOf;
    case RelationKind::kAbove: return RelationKind::kBelow;
    case RelationKind::kBelow: return RelationKind::kAbove;
    default: return k;
  }
}

// The planter's acceptance tests: each one clears the engine's threshold by
// a factor of two in the required direction.
struct Strict {
  RelationConfig rules;

  double Margin(const BBox& a, const BBox& b) const {
    return rules.position_margin * (Diagonal(a) + Diagonal(b)) / 2;
  }

  bool Directional(RelationKind k, const BBox& a, const BBox& b) const {
    const double dx = (b.x0 + b.x1) / 2 - (a.x0 + a.x1) / 2;
    const double dy = (b.y0 + b.y1) / 2 - (a.y0 + a.y1) / 2;
    double along = 0.0;
    double cross = 0.0;
    switch (k) {
      case RelationKind::kLeftOf: along = dx; cross = dy; break;
      case RelationKind::kRightOf: along = -dx; cross = dy; break;
      case RelationKind::kAbove: along = dy; cross = dx; break;
      case RelationKind::kBelow: along = -dy; cross = dx; break;
      default: return false;
    }
    return along > 0 && along >= 2 * std::fabs(cross) && along >= 2 * Margin(a, b);
  }

  bool Holds(RelationKind k, bool satisfied, const BBox& a, const BBox& b) const {
    const double min_w = std::min(a.x1 - a.x0, b.x1 - b.x0);
    const double overlap = Overlap1d(a.x0, a.x1, b.x0, b.x1);
    const double mean_diag = (Diagonal(a) + Diagonal(b)) / 2;
    switch (k) {
      case RelationKind::kLeftOf:
      case RelationKind::kRightOf:
      case RelationKind::kAbove:
      case RelationKind::kBelow:
        return Directional(satisfied ? k : Opposite(k), a, b);
      case RelationKind::kOn:
        if (satisfied) return a.y1 == b.y0 && overlap >= 2 * rules.on_overlap * min_w;
        return std::fabs(a.y1 - b.y0) >= 2 * rules.on_gap * (b.y1 - b.y0) ||
               overlap <= rules.on_overlap * min_w / 2;
      case RelationKind::kInside:
        return satisfied ? Contains(b, a) : Containment(a, b) <= rules.inside_ioa / 2;
      case RelationKind::kNextTo: {
        const double dist = std::hypot((a.x0 + a.x1 - b.x0 - b.x1) / 2, (a.y0 + a.y1 - b.y0 - b.y1) / 2);
        if (!satisfied) return dist >= 2 * rules.next_to_distance * mean_diag;
        const double ax = std::fabs((a.x0 + a.x1 - b.x0 - b.x1) / 2);
        const double ay = std::fabs((a.y0 + a.y1 - b.y0 - b.y1) / 2);
        const bool flat = 2 * ay <= ax || 2 * ay <= Margin(a, b);
        return dist <= rules.next_to_distance * mean_diag / 2 && Containment(a, b) <= rules.inside_ioa / 2 &&
               Containment(b, a) <= rules.inside_ioa / 2 && flat;
      }
      default:
        return true;  // decided by depth or by planted facts
    }
  }
};

struct Plan {
  const AtomicConstraint* c = nullptr;
  Role role = Role::kInclusion;
  std::size_t order = 0;  // position in inclusions-then-exclusions
  bool present = true;
  std::set<Facet> violated;
  std::string color;
  double orientation = 0.0;
  double depth = 1.0;
  std::vector<std::size_t> instances;

  bool Ok(Facet f) const { return !violated.contains(f); }
};

struct Instance {
  std::string id;
  std::size_t plan = 0;
  BBox box;
};

struct Link {
  std::size_t subject = 0;
  std::size_t object = 0;
  RelationKind kind = RelationKind::kOther;
  bool satisfied = true;
};

class Planter {
 public:
  Planter(const PlantSpec& spec, const EngineConfig& config)
      : set_(Canonicalize(spec.constraint_set)), config_(config), strict_{config.relation}, rng_(SplitMix(spec.seed)),
        seed_(spec.seed) {
    Validate(set_);
    for (const auto& c : set_.inclusions) AddPlan(c, Role::kInclusion);
    for (const auto& c : set_.exclusions) AddPlan(c, Role::kExclusion);
    for (auto& p : plans_) p.present = p.role == Role::kInclusion;
    ApplyViolations(spec.violations);
    CheckSiblings();
  }

  PlantResult Run() {
    AssignAttributes();
    AssignDepths();
    BuildInstances();
    CollectLinks();
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt) placed = Layout();
    if (!placed) Infeasible("no layout satisfies every planted relation: " + DescribeLinks());
    return Finish();
  }

 private:
  void AddPlan(const AtomicConstraint& c, Role role) {
    Plan p;
    p.c = &c;
    p.role = role;
    p.order = plans_.size();
    plans_.push_back(std::move(p));
  }

  Plan& PlanOf(std::string_view id) {
    for (auto& p : plans_) {
      if (p.c->id == id) return p;
    }
    Infeasible("violation names unknown entity \"" + std::string(id) + "\"");
  }

  std::size_t IndexOf(std::string_view id) const {
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      if (plans_[i].c->id == id) return i;
    }
    return plans_.size();
  }

  void ApplyViolations(const std::vector<Violation>& violations) {
    for (const auto& v : violations) {
      Plan& p = PlanOf(v.entity_id);
      const AtomicConstraint& c = *p.c;
      const std::string who = "\"" + c.id + "\"";
      if (p.role == Role::kExclusion) {
        if (v.facet != Facet::kPresence) Infeasible("exclusion " + who + " only supports a presence violation");
        p.present = true;
        continue;
      }
      const bool has = v.facet == Facet::kPresence || (v.facet == Facet::kCount && c.count) ||
                       (v.facet == Facet::kColor && c.color) ||
                       (v.facet == Facet::kOrientation && c.orientation) ||
                       (v.facet == Facet::kDepth && c.depth_rank) || (v.facet == Facet::kText && c.text) ||
                       (v.facet == Facet::kRelation && c.relation);
      if (!has) Infeasible(who + " has no " + std::string(ToString(v.facet)) + " facet to violate");
      p.violated.insert(v.facet);
    }
    for (auto& p : plans_) {
      if (p.violated.contains(Facet::kPresence)) {
        if (p.violated.size() > 1) {
          Infeasible("\"" + p.c->id + "\" cannot be absent and violate " +
                     std::string(ToString(*std::next(p.violated.begin()) == Facet::kPresence
                                              ? *p.violated.begin()
                                              : *std::next(p.violated.begin()))));
        }
        p.present = false;
      }
    }
  }

  // Entities sharing a category must be interchangeable, otherwise which
  // detection binds to which entity becomes part of the test.
  void CheckSiblings() {
    std::map<std::string, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < plans_.size(); ++i) by_category[plans_[i].c->category].push_back(i);
    std::set<std::string> relation_objects;
    for (const auto& p : plans_) {
      if (p.c->relation) relation_objects.insert(p.c->relation->object_id);
    }
    for (const auto& [category, members] : by_category) {
      if (members.size() < 2) continue;
      const Plan& first = plans_[members[0]];
      for (std::size_t m : members) {
        const Plan& p = plans_[m];
        const std::string pair = "\"" + first.c->id + "\" and \"" + p.c->id + "\"";
        if (p.role != first.role) Infeasible(pair + " share category \"" + category + "\" across roles");
        if (p.c->color != first.c->color || p.c->orientation != first.c->orientation ||
            p.c->text != first.c->text || p.c->depth_rank || p.c->relation ||
            relation_objects.contains(p.c->id)) {
          Infeasible(pair + " share category \"" + category + "\" but are not interchangeable");
        }
        for (Facet f : p.violated) {
          if (f != Facet::kCount) Infeasible(pair + " share a category; only count may be violated");
        }
        if (p.present != first.present) Infeasible(pair + " share a category but differ in presence");
      }
    }
  }

  void AssignAttributes() {
    std::vector<std::string> vocab(kColorVocabulary.begin(), kColorVocabulary.end());
    for (auto& p : plans_) {
      const AtomicConstraint& c = *p.c;
      if (c.color) {
        if (p.Ok(Facet::kColor)) {
          p.color = *c.color;
        } else {
          std::vector<std::string> others;
          for (const auto& v : vocab) {
            if (v != *c.color) others.push_back(v);
          }
          p.color = rng_.Pick(others);
        }
      } else {
        p.color = rng_.Pick(vocab);
      }
      if (c.orientation) {
        p.orientation = c.orientation->degrees;
        if (!p.Ok(Facet::kOrientation)) p.orientation = std::fmod(p.orientation + 180.0, 360.0);
      } else {
        p.orientation = 45.0 * static_cast<double>(rng_.Index(8));
      }
    }
  }

  // Depth levels from a longest-path order over "nearer than" edges.
  void AssignDepths() {
    const std::size_t n = plans_.size();
    std::vector<std::vector<std::size_t>> nearer_than(n);  // edge u -> v: u nearer than v
    auto edge = [&](std::size_t u, std::size_t v) { nearer_than[u].push_back(v); };
    for (std::size_t s = 0; s < n; ++s) {
      const Plan& p = plans_[s];
      if (!p.present || !p.c->relation || !IsDepthRelation(p.c->relation->kind)) continue;
      const std::size_t o = IndexOf(p.c->relation->object_id);
      if (!plans_[o].present) continue;
      const bool behind = p.c->relation->kind == RelationKind::kBehind;
      const bool subject_farther = behind == p.Ok(Facet::kRelation);
      if (subject_farther) edge(o, s);
      else edge(s, o);
    }
    for (Role role : {Role::kInclusion, Role::kExclusion}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < n; ++i) {
        if (plans_[i].role == role && plans_[i].present && plans_[i].c->depth_rank) pool.push_back(i);
      }
      std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        return *plans_[a].c->depth_rank < *plans_[b].c->depth_rank;
      });
      for (std::size_t k = 1; k < pool.size(); ++k) {
        if (*plans_[pool[k]].c->depth_rank == *plans_[pool[k - 1]].c->depth_rank) {
          Infeasible("\"" + plans_[pool[k - 1]].c->id + "\" and \"" + plans_[pool[k]].c->id +
                     "\" request the same depth rank");
        }
      }
      std::vector<std::size_t> chain = pool;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        if (plans_[pool[k]].Ok(Facet::kDepth)) continue;
        if (pool.size() < 2) Infeasible("\"" + plans_[pool[k]].c->id + "\" has no depth neighbor to swap with");
        const auto at = std::find(chain.begin(), chain.end(), pool[k]);
        const auto pos = static_cast<std::size_t>(at - chain.begin());
        std::swap(chain[pos], chain[pos + 1 < chain.size() ? pos + 1 : pos - 1]);
      }
      for (std::size_t k = 1; k < chain.size(); ++k) edge(chain[k - 1], chain[k]);
    }
    std::vector<int> indegree(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v : nearer_than[u]) ++indegree[v];
    }
    std::vector<int> level(n, 0);
    std::vector<std::size_t> ready;
    for (std::size_t u = 0; u < n; ++u) {
      if (indegree[u] == 0) ready.push_back(u);
    }
    std::size_t done = 0;
    while (!ready.empty()) {
      const std::size_t u = ready.back();
      ready.pop_back();
      ++done;
      for (std::size_t v : nearer_than[u]) {
        level[v] = std::max(level[v], level[u] + 1);
        if (--indegree[v] == 0) ready.push_back(v);
      }
    }
    if (done != n) {
      std::string cycle;
      for (std::size_t u = 0; u < n; ++u) {
        if (indegree[u] > 0) cycle += (cycle.empty() ? "" : ", ") + plans_[u].c->id;
      }
      Infeasible("depth constraints form a cycle among " + cycle);
    }
    for (std::size_t u = 0; u < n; ++u) plans_[u].depth = 1.0 + level[u];
  }

  void BuildInstances() {
    std::vector<std::string> categories;
    for (const auto& p : plans_) {
      if (std::find(categories.begin(), categories.end(), p.c->category) == categories.end()) {
        categories.push_back(p.c->category);
      }
    }
    for (const auto& category : categories) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < plans_.size(); ++i) {
        if (plans_[i].c->category == category && plans_[i].present) members.push_back(i);
      }
      if (members.empty()) continue;
      int target = 0;
      std::size_t owner = members[0];
      bool count_violated = false;
      for (std::size_t m : members) {
        if (plans_[m].c->count && *plans_[m].c->count > target) {
          target = *plans_[m].c->count;
          owner = m;
        }
        count_violated |= !plans_[m].Ok(Facet::kCount);
      }
      std::size_t total = std::max<std::size_t>(static_cast<std::size_t>(target), members.size());
      if (count_violated) ++total;
      for (std::size_t m : members) {
        plans_[m].instances.push_back(instances_.size());
        instances_.push_back({plans_[m].c->id, m, {}});
      }
      for (std::size_t k = members.size(); k < total; ++k) {
        const std::size_t copy = k - members.size() + 2;
        plans_[owner].instances.push_back(instances_.size());
        instances_.push_back({plans_[owner].c->id + "_" + std::to_string(copy), owner, {}});
      }
    }
  }

  void CollectLinks() {
    for (std::size_t s = 0; s < plans_.size(); ++s) {
      const Plan& p = plans_[s];
      if (!p.c->relation) continue;
      const std::size_t o = IndexOf(p.c->relation->object_id);
      if (!p.present || !plans_[o].present) continue;
      links_.push_back({s, o, p.c->relation->kind, p.Ok(Facet::kRelation)});
    }
  }

  std::string DescribeLinks() const {
    std::string out;
    for (const auto& l : links_) {
      if (!out.empty()) out += ", ";
      out += std::string(l.satisfied ? "" : "not ") + MakeRelation(ToString(l.kind), "", "").Name() + "(" +
             plans_[l.subject].c->id + ", " + plans_[l.object].c->id + ")";
    }
    return out.empty() ? "(no relations)" : out;
  }

  BBox RandomBox() {
    const double w = rng_.Uniform(0.08, 0.2);
    const double h = rng_.Uniform(0.08, 0.2);
    const double x0 = rng_.Uniform(0.0, 1.0 - w);
    const double y0 = rng_.Uniform(0.0, 1.0 - h);
    return {x0, y0, x0 + w, y0 + h};
  }

  BBox Beside(const BBox& b, double w, double h) {
    const double side = rng_.Chance(0.5) ? 1.0 : -1.0;
    const double d = (w + (b.x1 - b.x0)) / 2 + rng_.Uniform(0.03, 0.15);
    return Centered(b.cx() + side * d, b.cy() + rng_.Uniform(-0.2, 0.2) * d, w, h);
  }

  BBox Propose(const Link& link, const BBox& b) {
    double w = rng_.Uniform(0.08, 0.2);
    double h = rng_.Uniform(0.08, 0.2);
    RelationKind k = link.kind;
    if (IsDirectional(k) && !link.satisfied) k = Opposite(k);
    const double bw = b.x1 - b.x0;
    const double bh = b.y1 - b.y0;
    switch (k) {
      case RelationKind::kLeftOf:
      case RelationKind::kRightOf: {
        const double d = (w + bw) / 2 + rng_.Uniform(0.02, 0.15);
        const double side = k == RelationKind::kLeftOf ? -1.0 : 1.0;
        return Centered(b.cx() + side * d, b.cy() + rng_.Uniform(-0.25, 0.25) * d, w, h);
      }
      case RelationKind::kAbove:
      case RelationKind::kBelow: {
        const double d = (h + bh) / 2 + rng_.Uniform(0.02, 0.15);
        const double side = k == RelationKind::kAbove ? -1.0 : 1.0;
        return Centered(b.cx() + rng_.Uniform(-0.25, 0.25) * d, b.cy() + side * d, w, h);
      }
      case RelationKind::kOn:
        if (!link.satisfied) return Beside(b, w, h);
        w = bw * rng_.Uniform(0.5, 1.0);
        return {b.cx() - w / 2 + rng_.Uniform(-0.15, 0.15) * w, b.y0 - h,
                b.cx() + w / 2 + rng_.Uniform(-0.15, 0.15) * w, b.y0};
      case RelationKind::kInside: {
        if (!link.satisfied) return Beside(b, w, h);
        w = bw * rng_.Uniform(0.3, 0.6);
        h = bh * rng_.Uniform(0.3, 0.6);
        const double x0 = rng_.Uniform(b.x0 + 0.05 * bw, b.x1 - 0.05 * bw - w);
        const double y0 = rng_.Uniform(b.y0 + 0.05 * bh, b.y1 - 0.05 * bh - h);
        return {x0, y0, x0 + w, y0 + h};
      }
      case RelationKind::kNextTo: {
        if (link.satisfied) {
          w = bw * rng_.Uniform(0.85, 1.15);
          h = std::max(bh, w) * rng_.Uniform(1.0, 1.3);
        }
        const double mean_diag = (std::hypot(w, h) + Diagonal(b)) / 2;
        const double d = link.satisfied ? rng_.Uniform(0.42, 0.49) * mean_diag : rng_.Uniform(2.1, 2.6) * mean_diag;
        const double side = rng_.Chance(0.5) ? 1.0 : -1.0;
        return Centered(b.cx() + side * d, b.cy() + rng_.Uniform(-0.1, 0.1) * d, w, h);
      }
      default:
        return RandomBox();
    }
  }

  bool PairAcceptable(std::size_t i, std::size_t j) const {
    const Instance& a = instances_[i];
    const Instance& b = instances_[j];
    bool may_overlap = false;
    for (const auto& l : links_) {
      bool forward = l.subject == a.plan && l.object == b.plan;
      bool backward = l.subject == b.plan && l.object == a.plan;
      if (!forward && !backward) continue;
      const BBox& sub = forward ? a.box : b.box;
      const BBox& obj = forward ? b.box : a.box;
      if (!strict_.Holds(l.kind, l.satisfied, sub, obj)) return false;
      if (l.satisfied && (l.kind == RelationKind::kInside || l.kind == RelationKind::kNextTo)) may_overlap = true;
    }
    return may_overlap || Intersection(a.box, b.box) == 0.0;
  }

  std::vector<std::size_t> PlacementOrder() const {
    // Objects before their subjects; falls back to entity order on cycles.
    std::vector<std::size_t> order;
    std::vector<bool> placed(plans_.size(), false);
    for (std::size_t round = 0; round < plans_.size(); ++round) {
      for (std::size_t i = 0; i < plans_.size(); ++i) {
        if (placed[i] || !plans_[i].present) continue;
        bool waiting = false;
        for (const auto& l : links_) {
          if (l.subject == i && !placed[l.object] && l.object != i) waiting = true;
        }
        if (!waiting || round + 1 == plans_.size()) {
          placed[i] = true;
          order.push_back(i);
        }
      }
    }
    return order;
  }

  bool Layout() {
    texts_.clear();
    std::vector<std::size_t> placed;
    for (std::size_t p : PlacementOrder()) {
      const Link* anchor_link = nullptr;
      for (const auto& l : links_) {
        if (l.subject == p && !plans_[l.object].instances.empty()) anchor_link = &l;
      }
      for (std::size_t inst : plans_[p].instances) {
        bool ok = false;
        for (int attempt = 0; attempt < 300 && !ok; ++attempt) {
          BBox box;
          const auto& anchors = anchor_link ? plans_[anchor_link->object].instances : std::vector<std::size_t>{};
          const bool anchored = anchor_link && std::find(placed.begin(), placed.end(), anchors.front()) != placed.end();
          if (anchored) {
            box = Propose(*anchor_link, instances_[anchors[rng_.Index(anchors.size())]].box);
          } else {
            box = RandomBox();
          }
          box = Rounded(box);
          if (!InUnitSquare(box)) continue;
          instances_[inst].box = box;
          ok = true;
          for (std::size_t other : placed) {
            if (!PairAcceptable(inst, other)) {
              ok = false;
              break;
            }
          }
        }
        if (!ok) return false;
        placed.push_back(inst);
      }
    }
    return PlaceTexts();
  }

  bool PlaceTexts() {
    for (const auto& p : plans_) {
      if (!p.present || !p.c->text) continue;
      if (p.Ok(Facet::kText)) {
        for (std::size_t inst : p.instances) {
          const BBox& o = instances_[inst].box;
          const double w = o.x1 - o.x0;
          const double h = o.y1 - o.y0;
          BBox t = Rounded({o.x0 + 0.25 * w, o.y0 + 0.35 * h, o.x1 - 0.25 * w, o.y1 - 0.35 * h});
          if (!Contains(o, t) || !(t.x0 < t.x1 && t.y0 < t.y1)) return false;
          texts_.push_back({*p.c->text, t});
        }
      } else {
        bool ok = false;
        for (int attempt = 0; attempt < 300 && !ok; ++attempt) {
          const double w = rng_.Uniform(0.04, 0.08);
          const double h = rng_.Uniform(0.02, 0.04);
          const double x0 = rng_.Uniform(0.0, 1.0 - w);
          const double y0 = rng_.Uniform(0.0, 1.0 - h);
          const BBox t = Rounded({x0, y0, x0 + w, y0 + h});
          if (!InUnitSquare(t)) continue;
          ok = std::all_of(instances_.begin(), instances_.end(),
                           [&](const Instance& i) { return Intersection(i.box, t) == 0.0; });
          if (ok) texts_.push_back({*p.c->text, t});
        }
        if (!ok) return false;
      }
    }
    // A misplaced text must not be rescued by any other text landing on it.
    for (const auto& p : plans_) {
      if (!p.present || !p.c->text || p.Ok(Facet::kText)) continue;
      for (std::size_t inst : p.instances) {
        for (const auto& t : texts_) {
          if (Intersection(instances_[inst].box, t.box) != 0.0) return false;
        }
      }
    }
    return true;
  }

  PlantResult Finish() {
    PlantResult out;
    out.scene.seed = seed_;
    for (const auto& inst : instances_) {
      const Plan& p = plans_[inst.plan];
      out.scene.objects.push_back({inst.id, p.c->category, inst.box, p.color, p.orientation, p.depth});
    }
    out.scene.texts = texts_;
    for (const auto& l : links_) {
      if (l.kind != RelationKind::kOther) continue;
      for (std::size_t s : plans_[l.subject].instances) {
        for (std::size_t o : plans_[l.object].instances) {
          out.scene.facts.push_back({plans_[l.subject].c->relation->Name(), instances_[s].id, instances_[o].id,
                                     l.satisfied ? 1.0 : 0.0});
        }
      }
    }
    Expect(out);
    return out;
  }

  // Analytic scores straight from the planted structure.
  void Expect(PlantResult& out) const {
    std::map<std::string, std::size_t> per_category;
    for (const auto& inst : instances_) ++per_category[plans_[inst.plan].c->category];
    double raw = 0.0;
    std::size_t n_inclusions = 0;
    std::vector<double> composed(plans_.size(), 0.0);
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      const Plan& p = plans_[i];
      const AtomicConstraint& c = *p.c;
      if (!p.present) continue;
      double score = 1.0;
      if (c.count) {
        const double n = static_cast<double>(per_category[c.category]);
        score *= std::exp(-std::fabs(n - *c.count));
      }
      if (c.color && !p.Ok(Facet::kColor)) score = 0.0;
      if (c.orientation && !p.Ok(Facet::kOrientation)) score = 0.0;
      if (c.text && !p.Ok(Facet::kText)) score = 0.0;
      if (c.depth_rank) {
        int rank = 1;
        for (const auto& q : plans_) {
          if (q.role == p.role && q.present && q.c->depth_rank && q.depth < p.depth) ++rank;
        }
        score *= std::exp(-std::fabs(static_cast<double>(rank - *c.depth_rank)));
      }
      if (c.relation) {
        const Plan& object = plans_[IndexOf(c.relation->object_id)];
        if (!object.present || !p.Ok(Facet::kRelation)) score = 0.0;
      }
      composed[i] = score;
    }
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      if (plans_[i].role != Role::kInclusion) continue;
      raw += composed[i];
      ++n_inclusions;
    }
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      if (plans_[i].role == Role::kExclusion) raw -= composed[i];
    }
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      const bool inclusion = plans_[i].role == Role::kInclusion;
      out.expected.push_back({plans_[i].c->id, plans_[i].role, composed[i],
                              inclusion ? composed[i] >= config_.pass_threshold
                                        : composed[i] < config_.pass_threshold});
    }
    out.raw_total = raw;
    out.normalized_total = std::clamp(raw / static_cast<double>(std::max<std::size_t>(1, n_inclusions)), 0.0, 1.0);
    out.verdict = out.normalized_total >= config_.pass_threshold;
  }

  ConstraintSet set_;
  EngineConfig config_;
  Strict strict_;
  Rng rng_;
  std::uint64_t seed_;
  std::vector<Plan> plans_;
  std::vector<Instance> instances_;
  std::vector<Link> links_;
  std::vector<SceneText> texts_;
};

// ---------------------------------------------------------------------------
// Template rendering for random suites.

struct Noun {
  std::string singular;
  std::string plural;
};

const std::vector<Noun>& Objects() {
  static const std::vector<Noun> kObjects = {
      {"cup", "cups"},       {"laptop", "laptops"},     {"dog", "dogs"},           {"cat", "cats"},
      {"chair", "chairs"},   {"table", "tables"},       {"book", "books"},         {"bottle", "bottles"},
      {"vase", "vases"},     {"clock", "clocks"},       {"bench", "benches"},      {"car", "cars"},
      {"bicycle", "bicycles"}, {"lamp", "lamps"},       {"bowl", "bowls"},         {"phone", "phones"},
      {"umbrella", "umbrellas"}, {"backpack", "backpacks"}, {"horse", "horses"}, {"teddy bear", "teddy bears"}};
  return kObjects;
}

const std::vector<Noun>& TextCarriers() {
  static const std::vector<Noun> kCarriers = {{"sign", "signs"},   {"poster", "posters"}, {"banner", "banners"},
                                              {"shirt", "shirts"}, {"mug", "mugs"},       {"box", "boxes"}};
  return kCarriers;
}

const std::vector<std::string> kTexts = {"STOP", "OPEN", "EXIT", "SALE", "CAFE", "PUSH", "HELLO", "PARK", "Fresh Bread"};
const std::vector<std::string> kPlanarRelations = {"to the left of", "to the right of", "above", "below",
                                                   "on top of",      "next to",         "inside"};
const std::vector<std::string> kDepthRelations = {"behind", "in front of"};
const std::vector<std::string> kDirections = {"the camera", "left",       "right",     "away from the camera",
                                              "front-left", "front-right", "back-left", "back-right"};
const std::vector<std::string> kNumbers = {"two", "three", "four"};

class PromptWriter {
 public:
  explicit PromptWriter(Rng& rng) : rng_(rng) {}

  // Draws distinct object nouns.
  std::vector<Noun> Distinct(std::size_t k, const std::vector<Noun>& pool) {
    std::vector<Noun> out;
    while (out.size() < k) {
      const Noun& n = rng_.Pick(pool);
      if (std::none_of(out.begin(), out.end(), [&](const Noun& o) { return o.singular == n.singular; })) {
        out.push_back(n);
      }
    }
    return out;
  }

  static std::string Article(const std::string& word) {
    return std::string("aeiou").find(word[0]) != std::string::npos ? "an " + word : "a " + word;
  }

  std::string Color() { return std::string(kColorVocabulary[rng_.Index(kColorVocabulary.size())]); }

  std::string Direction() {
    if (rng_.Chance(0.25)) return std::to_string(15 * static_cast<int>(rng_.Index(24))) + " degrees";
    return rng_.Pick(kDirections);
  }

  std::string Quote(const std::string& s) { return "\"" + s + "\""; }

  std::string Render(Tag tag, std::vector<std::string>* used) {
    auto note = [&](const std::vector<Noun>& nouns) {
      for (const auto& n : nouns) used->push_back(n.singular);
    };
    const std::string prefix = rng_.Chance(0.3) ? "a photo of " : "";
    switch (tag) {
      case Tag::kSingleObject: {
        auto n = Distinct(1, Objects());
        note(n);
        return "a photo of " + Article(n[0].singular);
      }
      case Tag::kTwoObject: {
        auto n = Distinct(2, Objects());
        note(n);
        return "a photo of " + Article(n[0].singular) + " and " + Article(n[1].singular);
      }
      case Tag::kCounting: {
        auto n = Distinct(2, Objects());
        if (rng_.Chance(0.5)) {
          note({n[0]});
          return prefix + rng_.Pick(kNumbers) + " " + n[0].plural;
        }
        note(n);
        return prefix + rng_.Pick(kNumbers) + " " + n[0].plural + " and " + Article(n[1].singular);
      }
      case Tag::kColor: {
        auto n = Distinct(2, Objects());
        if (rng_.Chance(0.5)) {
          note({n[0]});
          return "a photo of " + Article(Color() + " " + n[0].singular);
        }
        note(n);
        return prefix + Article(Color() + " " + n[0].singular) + " and " + Article(Color() + " " + n[1].singular);
      }
      case Tag::kPosition: {
        auto n = Distinct(2, Objects());
        note(n);
        const std::string rel = rng_.Pick(kPlanarRelations);
        if (rng_.Chance(0.3)) {
          return prefix + rng_.Pick(kNumbers) + " " + n[0].plural + " " + rel + " " + Article(n[1].singular);
        }
        return prefix + Article(n[0].singular) + " " + rel + " " + Article(n[1].singular);
      }
      case Tag::kDepth3d: {
        if (rng_.Chance(0.5)) {
          auto n = Distinct(2, Objects());
          note(n);
          return prefix + Article(n[0].singular) + " " + rng_.Pick(kDepthRelations) + " " + Article(n[1].singular);
        }
        const std::size_t k = rng_.Chance(0.5) ? 2 : 3;
        auto n = Distinct(k, Objects());
        note(n);
        std::string body = Article(n[0].singular);
        for (std::size_t i = 1; i < k; ++i) body += (i + 1 == k ? " and " : ", ") + Article(n[i].singular);
        return prefix + body + (rng_.Chance(0.5) ? " from nearest to farthest" : " from farthest to nearest");
      }
      case Tag::kOrientation: {
        auto n = Distinct(2, Objects());
        if (rng_.Chance(0.5)) {
          note({n[0]});
          return prefix + Article(n[0].singular) + " facing " + Direction();
        }
        note(n);
        return prefix + Article(n[0].singular) + " facing " + Direction() + " and " + Article(n[1].singular) +
               " facing " + Direction();
      }
      case Tag::kTextPosition: {
        auto carrier = Distinct(1, TextCarriers());
        auto n = Distinct(1, Objects());
        const std::string text = Quote(rng_.Pick(kTexts));
        if (rng_.Chance(0.4)) {
          note(carrier);
          return prefix + Article(carrier[0].singular) + " labeled " + text;
        }
        note(carrier);
        note(n);
        return prefix + Article(carrier[0].singular) + " with the text " + text + " " + rng_.Pick(kPlanarRelations) +
               " " + Article(n[0].singular);
      }
      case Tag::kTextCount: {
        auto carrier = Distinct(1, TextCarriers());
        note(carrier);
        return prefix + rng_.Pick(kNumbers) + " " + carrier[0].plural + " each labeled " + Quote(rng_.Pick(kTexts));
      }
      case Tag::kComplex: {
        if (rng_.Chance(0.5)) {
          auto n = Distinct(3, Objects());
          note(n);
          return prefix + Article(n[0].singular) + " " + rng_.Pick(kPlanarRelations) + " " + Article(n[1].singular) +
                 ", and the " + n[1].singular + " " + rng_.Pick(kPlanarRelations) + " " + Article(n[2].singular);
        }
        auto n = Distinct(4, Objects());
        note(n);
        return prefix + Article(n[0].singular) + " " + rng_.Pick(kPlanarRelations) + " " + Article(n[1].singular) +
               " and " + Article(n[2].singular) + " " + rng_.Pick(kPlanarRelations) + " " + Article(n[3].singular);
      }
    }
    return {};
  }

  std::string Exclusion(const std::vector<std::string>& used) {
    for (;;) {
      const Noun& n = rng_.Pick(Objects());
      if (std::find(used.begin(), used.end(), n.singular) == used.end()) return " without " + Article(n.singular);
    }
  }

 private:
  Rng& rng_;
};

std::vector<Violation> Candidates(const ConstraintSet& set) {
  std::vector<Violation> out;
  for (const auto& c : set.inclusions) {
    out.push_back({c.id, Facet::kPresence});
    if (c.count) out.push_back({c.id, Facet::kCount});
    if (c.color) out.push_back({c.id, Facet::kColor});
    if (c.orientation) out.push_back({c.id, Facet::kOrientation});
    if (c.depth_rank) out.push_back({c.id, Facet::kDepth});
    if (c.text) out.push_back({c.id, Facet::kText});
    if (c.relation) out.push_back({c.id, Facet::kRelation});
  }
  for (const auto& c : set.exclusions) out.push_back({c.id, Facet::kPresence});
  return out;
}

}  // namespace

Json ToJson(const PlantSpec& spec) {
  Json out;
  out["schema_version"] = 1;
  out["constraint_set"] = ToJson(spec.constraint_set);
  out["violations"] = Json::array();
  for (const auto& v : spec.violations) {
    out["violations"].push_back(Json{{"entity_id", v.entity_id}, {"facet", std::string(ToString(v.facet))}});
  }
  out["seed"] = spec.seed;
  return out;
}

std::string Serialize(const PlantSpec& spec) { return ToJson(spec).dump(); }

PlantSpec ParsePlantSpec(const Json& doc, std::string_view path) {
  const std::string base(path);
  auto at = [&](std::string_view key) { return base.empty() ? std::string(key) : base + "." + std::string(key); };
  auto fail = [](const std::string& where, const std::string& what) -> void {
    throw Error(ErrorKind::kSchemaViolation, where + ": " + what);
  };
  if (!doc.is_object()) fail(base.empty() ? "$" : base, "expected object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "schema_version" && key != "constraint_set" && key != "violations" && key != "seed") {
      fail(at(key), "unknown field");
    }
  }
  if (auto v = doc.find("schema_version"); v != doc.end() && *v != 1) fail(at("schema_version"), "must be 1");
  PlantSpec spec;
  auto cs = doc.find("constraint_set");
  if (cs == doc.end()) fail(at("constraint_set"), "missing required field");
  spec.constraint_set = ParseConstraintSet(*cs, at("constraint_set"));
  if (auto v = doc.find("violations"); v != doc.end()) {
    if (!v->is_array()) fail(at("violations"), "expected array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string where = at("violations") + "[" + std::to_string(i) + "]";
      const Json& item = (*v)[i];
      if (!item.is_object() || !item.contains("entity_id") || !item["entity_id"].is_string() ||
          !item.contains("facet") || !item["facet"].is_string()) {
        fail(where, "expected {\"entity_id\": string, \"facet\": string}");
      }
      auto facet = ParseFacet(item["facet"].get<std::string>());
      if (!facet) fail(where + ".facet", "unknown facet \"" + item["facet"].get<std::string>() + "\"");
      if (!spec.constraint_set.Find(item["entity_id"].get<std::string>())) {
        fail(where + ".entity_id", "unknown entity");
      }
      spec.violations.push_back({item["entity_id"].get<std::string>(), *facet});
    }
  }
  if (auto v = doc.find("seed"); v != doc.end()) {
    if (!v->is_number_unsigned() && !v->is_number_integer()) fail(at("seed"), "expected integer");
    spec.seed = v->get<std::uint64_t>();
  }
  return spec;
}

PlantResult PlantScene(const PlantSpec& spec, const EngineConfig& config) {
  Planter planter(spec, config);
  return planter.Run();
}

std::vector<TagWeight> DefaultTagMix() {
  return {{Tag::kTextPosition, 1.0}, {Tag::kTextCount, 1.0}, {Tag::kComplex, 1.0},  {Tag::kOrientation, 1.0},
          {Tag::kDepth3d, 1.0},      {Tag::kCounting, 1.0},  {Tag::kColor, 1.0},    {Tag::kPosition, 1.0},
          {Tag::kSingleObject, 1.0}, {Tag::kTwoObject, 1.0}};
}

std::vector<std::pair<Tag, int>> StratifiedCounts(int n, const std::vector<TagWeight>& mix) {
  if (n < 0) throw Error(ErrorKind::kInvalidArgument, "suite size must be non-negative");
  double total = 0.0;
  for (const auto& m : mix) {
    if (!(m.weight >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tag weights must be non-negative");
    total += m.weight;
  }
  if (mix.empty() || total <= 0.0) throw Error(ErrorKind::kInvalidArgument, "tag mix has no positive weight");
  std::vector<std::pair<Tag, int>> out;
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double quota = n * mix[i].weight / total;
    const int base = static_cast<int>(std::floor(quota));
    out.emplace_back(mix[i].tag, base);
    assigned += base;
    remainders.emplace_back(quota - base, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++out[remainders[k % remainders.size()].second].second;
  return out;
}

std::vector<PlantSpec> RandomSuite(int n, std::uint64_t seed, const std::vector<TagWeight>& mix,
                                   const EngineConfig& config) {
  const auto counts = StratifiedCounts(n, mix);
  // Round-robin over tags so any prefix of the suite stays mixed.
  std::vector<Tag> sequence;
  std::vector<int> left;
  for (const auto& [tag, count] : counts) left.push_back(count);
  while (static_cast<int>(sequence.size()) < n) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (left[i] > 0) {
        sequence.push_back(counts[i].first);
        --left[i];
      }
    }
  }
  std::vector<PlantSpec> suite;
  for (std::size_t index = 0; index < sequence.size(); ++index) {
    const Tag tag = sequence[index];
    bool done = false;
    for (std::uint64_t attempt = 0; attempt < 2000 && !done; ++attempt) {
      const std::uint64_t item_seed = SplitMix(SplitMix(seed) ^ SplitMix(index * 0x10001ULL + attempt));
      Rng rng(item_seed);
      PromptWriter writer(rng);
      std::vector<std::string> used;
      std::string prompt = writer.Render(tag, &used);
      if (rng.Chance(0.2)) prompt += writer.Exclusion(used);
      PlantSpec spec;
      try {
        spec.constraint_set = DecomposeTemplate(prompt);
      } catch (const Error&) {
        continue;
      }
      if (spec.constraint_set.tag != tag) continue;
      spec.seed = item_seed;
      if (rng.Chance(0.35)) {
        const auto candidates = Candidates(spec.constraint_set);
        spec.violations.push_back(rng.Pick(candidates));
      }
      try {
        const PlantResult plant = PlantScene(spec, config);
        if (std::fabs(plant.normalized_total - config.pass_threshold) < 0.01) continue;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kInfeasiblePlant) continue;
        throw;
      }
      suite.push_back(std::move(spec));
      done = true;
    }
    if (!done) {
      throw Error(ErrorKind::kInfeasiblePlant, "could not draw a feasible " + std::string(ToString(tag)) + " item");
    }
  }
  return suite;
}

}  // namespace spatrwd

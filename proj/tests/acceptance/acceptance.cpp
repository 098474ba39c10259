// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Every oracle below is written independently of the
// library code it checks.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "spatrwd/backend.hpp"
#include "spatrwd/binding.hpp"
#include "spatrwd/engine.hpp"
#include "spatrwd/geometry.hpp"
#include "spatrwd/relations.hpp"
#include "spatrwd/report.hpp"
#include "spatrwd/scene_oracle.hpp"
#include "spatrwd/service.hpp"
#include "spatrwd/subrewards.hpp"

namespace fs = std::filesystem;
using namespace spatrwd;

namespace {

// Pinned tolerances and budgets.
constexpr double kFormulaTol = 1e-12;
constexpr double kBindingTol = 1e-12;
constexpr double kFormulaBudget = 1.0;
constexpr double kTextBudget = 30.0;
constexpr double kRelationBudget = 10.0;
constexpr double kPlantBudget = 60.0;
constexpr double kExclusionBudget = 5.0;
constexpr int kTextInstances = 10000;
constexpr int kMaxTextDetections = 12;
constexpr int kPairsPerRelation = 1000;
constexpr int kPlantItems = 500;
constexpr int kExclusionSets = 100;
constexpr int kParityRequests = 50;
constexpr int kBindingScenes = 300;
constexpr int kBindingMatrices = 2000;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void Fail(const std::string& what) {
    pass = false;
    if (problems.size() < 5) problems.push_back(what);
  }
};

int failures = 0;

void Report(const std::string& name, Outcome o, double seconds, double budget) {
  if (budget > 0 && seconds >= budget) {
    o.Fail("runtime " + std::to_string(seconds) + " s exceeds " + std::to_string(budget) + " s");
  }
  if (!o.pass) ++failures;
  std::ostringstream line;
  line << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << " [" << seconds << " s";
  if (budget > 0) line << " / " << budget << " s";
  line << "]";
  std::cout << line.str() << "\n";
  for (const auto& p : o.problems) std::cout << "    " << p << "\n";
  std::cout.flush();
}

// ---------------------------------------------------------------------------
// Independent geometry and text oracles.

namespace oracle {

double Overlap1d(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

double Intersection(const BBox& a, const BBox& b) {
  const double w = Overlap1d(a.x0, a.x1, b.x0, b.x1);
  const double h = Overlap1d(a.y0, a.y1, b.y0, b.y1);
  return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

double Containment(const BBox& inner, const BBox& outer) {
  const double area = (inner.x1 - inner.x0) * (inner.y1 - inner.y0);
  if (!(area > 0.0)) return 0.0;
  const double r = Intersection(inner, outer) / area;
  return r > 1.0 ? 1.0 : r;
}

std::string Fold(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::size_t Levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

// ASCII letters only, so folding is plain lowercasing.
double Similarity(const std::string& target, const std::string& detected) {
  const std::string a = Fold(target);
  const std::string b = Fold(detected);
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) return 1.0;
  return 1.0 - static_cast<double>(Levenshtein(a, b)) / static_cast<double>(n);
}

double TextBrute(const std::string& target, const BBox& obj, const std::vector<TextDetection>& dets) {
  double best = 0.0;
  for (const auto& d : dets) best = std::max(best, Similarity(target, d.text) * Containment(d.box, obj));
  return best;
}

double AngleGap(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

// The relation decision table, restated from its definition.
struct Table {
  double margin_frac = 0.05;
  double gap_frac = 0.05;
  double overlap_frac = 0.3;
  double contain = 0.9;
  double near_mult = 1.0;
  double eps_frac = 0.02;

  static double Diag(const BBox& b) { return std::hypot(b.x1 - b.x0, b.y1 - b.y0); }

  // +1 when B lies along the positive axis from A by the dominant-axis rule,
  // -1 along the negative axis, 0 otherwise. axis 0 is x, 1 is y.
  int Dominant(const BBox& a, const BBox& b, int axis) const {
    const double along = axis == 0 ? (b.x0 + b.x1) / 2.0 - (a.x0 + a.x1) / 2.0
                                   : (b.y0 + b.y1) / 2.0 - (a.y0 + a.y1) / 2.0;
    const double cross = axis == 0 ? (b.y0 + b.y1) / 2.0 - (a.y0 + a.y1) / 2.0
                                   : (b.x0 + b.x1) / 2.0 - (a.x0 + a.x1) / 2.0;
    const double margin = margin_frac * ((Diag(a) + Diag(b)) / 2.0);
    if (std::fabs(along) <= std::fabs(cross) || std::fabs(along) <= margin) return 0;
    return along > 0 ? 1 : -1;
  }

  bool Holds(RelationKind kind, const BBox& a, const BBox& b, double da, double db) const {
    switch (kind) {
      case RelationKind::kLeftOf: return Dominant(a, b, 0) == 1;
      case RelationKind::kRightOf: return Dominant(a, b, 0) == -1;
      case RelationKind::kAbove: return Dominant(a, b, 1) == 1;
      case RelationKind::kBelow: return Dominant(a, b, 1) == -1;
      case RelationKind::kOn: {
        const double hb = b.y1 - b.y0;
        const double minw = std::min(a.x1 - a.x0, b.x1 - b.x0);
        return std::fabs(a.y1 - b.y0) <= gap_frac * hb && Overlap1d(a.x0, a.x1, b.x0, b.x1) >= overlap_frac * minw &&
               (a.y0 + a.y1) < (b.y0 + b.y1);
      }
      case RelationKind::kInside: return Containment(a, b) >= contain;
      case RelationKind::kNextTo: {
        const double dist = std::hypot((b.x0 + b.x1) / 2.0 - (a.x0 + a.x1) / 2.0, (b.y0 + b.y1) / 2.0 - (a.y0 + a.y1) / 2.0);
        const bool near = dist <= near_mult * ((Diag(a) + Diag(b)) / 2.0);
        const bool nested = Containment(a, b) >= contain || Containment(b, a) >= contain;
        return near && !nested && Dominant(a, b, 1) == 0;
      }
      case RelationKind::kBehind: return da > db + eps_frac * std::max(da, db);
      case RelationKind::kInFrontOf: return da < db - eps_frac * std::max(da, db);
      default: return false;
    }
  }
};

}  // namespace oracle

// ---------------------------------------------------------------------------
// Helpers.

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

struct Proc {
  int status = -1;
  std::string out;
};

Proc RunCli(const std::string& args) {
  const std::string command = std::string(SPATRWD_CLI) + " " + args + " 2>/dev/null";
  Proc p;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return p;
  char buffer[1 << 14];
  std::size_t n;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) p.out.append(buffer, n);
  const int status = ::pclose(pipe);
  p.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

std::string Slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path WorkDir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("spatrwd_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

ScoreReport ScoreOnScene(const ConstraintSet& set, const SceneGraph& scene, const EngineConfig& config = {}) {
  auto backend = FixtureBackend(scene, config.relation);
  return ScoreImage(set, ImageRef{}, *backend, config);
}

BBox RandomBox(std::mt19937_64& rng, bool grid, double max_side = 0.5) {
  if (grid) {
    std::uniform_int_distribution<int> cell(0, 16);
    for (;;) {
      int a = cell(rng), b = cell(rng), c = cell(rng), d = cell(rng);
      if (a == b || c == d) continue;
      BBox box{std::min(a, b) / 16.0, std::min(c, d) / 16.0, std::max(a, b) / 16.0, std::max(c, d) / 16.0};
      if (box.width() <= max_side + 1e-9 && box.height() <= max_side + 1e-9) return box;
    }
  }
  std::uniform_real_distribution<double> side(0.02, max_side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = side(rng), h = side(rng);
  const double x0 = unit(rng) * (1.0 - w), y0 = unit(rng) * (1.0 - h);
  return {x0, y0, x0 + w, y0 + h};
}

// ---------------------------------------------------------------------------
// Criteria.

void FormulaExactness() {
  const auto start = Clock::now();
  Outcome o;
  auto close = [&](const char* what, double got, double want) {
    if (!(std::fabs(got - want) <= kFormulaTol)) {
      std::ostringstream s;
      s.precision(17);
      s << what << " = " << got << ", want " << want;
      o.Fail(s.str());
    }
  };
  close("count_reward(2, 3)", CountReward(2, 3), 1.0 / std::exp(1.0));
  close("depth_reward(3, 1)", DepthReward(3, 1), 1.0 / (std::exp(1.0) * std::exp(1.0)));
  close("orientation_reward(350, 10, 22.5)", OrientationReward(350.0, 10.0, 22.5), 1.0);
  const double half = Ioa({0.0, 0.0, 0.4, 0.2}, {0.2, 0.0, 0.8, 0.6});
  if (half != 0.5) o.Fail("half-overlap ioa = " + std::to_string(half));
  close("count_reward(3, 3)", CountReward(3, 3), 1.0);
  close("orientation_reward(10, 350, 22.5)", OrientationReward(10.0, 350.0, 22.5), 1.0);
  close("orientation_reward(0, 180, 45)", OrientationReward(0.0, 180.0, 45.0), 0.0);
  o.detail = "count e^-1, depth e^-2, half-overlap IoA 0.5, 350/10 wraparound";
  Report("formula_exactness", o, Seconds(start), kFormulaBudget);
}

void TextRewardOracle() {
  const auto start = Clock::now();
  Outcome o;
  std::mt19937_64 rng(20260101);
  const std::string alphabet = "abcABC";
  auto word = [&](int min_len) {
    std::uniform_int_distribution<int> len(min_len, 6);
    std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
    std::string s;
    for (int n = len(rng); n > 0; --n) s.push_back(alphabet[ch(rng)]);
    return s;
  };
  std::uniform_int_distribution<int> count(0, kMaxTextDetections);
  std::bernoulli_distribution coin(0.5);
  int nonzero = 0, fractional = 0;
  for (int i = 0; i < kTextInstances; ++i) {
    const bool grid = coin(rng);
    const std::string target = word(1);
    const BBox obj = RandomBox(rng, grid, 0.7);
    std::vector<TextDetection> dets;
    for (int n = count(rng); n > 0; --n) {
      std::string t = coin(rng) ? target : word(1);
      if (coin(rng)) std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
      dets.push_back({t, RandomBox(rng, grid, 0.4), 1.0});
    }
    const double got = TextReward(target, obj, dets);
    const double want = oracle::TextBrute(target, obj, dets);
    if (got != want) {
      std::ostringstream s;
      s.precision(17);
      s << "instance " << i << ": text_reward " << got << " vs brute force " << want;
      o.Fail(s.str());
    }
    if (want > 0) ++nonzero;
    if (want > 0 && want < 1) ++fractional;
  }
  o.detail = std::to_string(kTextInstances) + " instances, exact equality (" + std::to_string(nonzero) +
             " nonzero, " + std::to_string(fractional) + " fractional)";
  Report("text_reward_oracle", o, Seconds(start), kTextBudget);
}

void RelationDualOracle() {
  const auto start = Clock::now();
  Outcome o;
  const RelationConfig config;
  const oracle::Table table;
  const RelationKind kinds[] = {RelationKind::kLeftOf, RelationKind::kRightOf, RelationKind::kAbove,
                                RelationKind::kBelow,  RelationKind::kOn,      RelationKind::kInside,
                                RelationKind::kNextTo, RelationKind::kBehind,  RelationKind::kInFrontOf};
  auto converse = [](RelationKind k) {
    switch (k) {
      case RelationKind::kLeftOf: return RelationKind::kRightOf;
      case RelationKind::kRightOf: return RelationKind::kLeftOf;
      case RelationKind::kAbove: return RelationKind::kBelow;
      case RelationKind::kBelow: return RelationKind::kAbove;
      case RelationKind::kBehind: return RelationKind::kInFrontOf;
      case RelationKind::kInFrontOf: return RelationKind::kBehind;
      default: return k;
    }
  };
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> style(0, 3);
  int total = 0, mismatches = 0, scale_breaks = 0, symmetry_breaks = 0;
  std::map<std::string, int> positives;
  auto eval = [&](RelationKind k, const BBox& a, const BBox& b, double da, double db) {
    std::optional<DepthPair> depths;
    if (IsDepthRelation(k)) depths = DepthPair{da, db, std::max(da, db)};
    return EvaluateRelationGeometric(k, a, b, depths, config) == 1.0;
  };
  for (RelationKind kind : kinds) {
    for (int i = 0; i < kPairsPerRelation; ++i) {
      BBox a, b;
      const int s = style(rng);
      a = RandomBox(rng, s == 1);
      b = RandomBox(rng, s == 1);
      if (s == 2 && kind == RelationKind::kOn) {
        // Stack A on B with a small gap and random horizontal offset.
        b = RandomBox(rng, false, 0.4);
        const double w = 0.05 + 0.3 * unit(rng), h = 0.05 + 0.3 * unit(rng);
        const double gap = (unit(rng) - 0.5) * 0.2 * b.height();
        const double y1 = std::clamp(b.y0 + gap, h + 1e-6, 1.0);
        const double x0 = std::clamp(b.x0 + (unit(rng) - 0.5) * b.width(), 0.0, 1.0 - w);
        a = {x0, y1 - h, x0 + w, y1};
      } else if (s == 2 && (kind == RelationKind::kInside || kind == RelationKind::kNextTo)) {
        b = RandomBox(rng, false, 0.6);
        const double w = b.width() * (0.2 + 0.9 * unit(rng)), h = b.height() * (0.2 + 0.9 * unit(rng));
        const double x0 = std::clamp(b.x0 + (unit(rng) - 0.3) * b.width(), 0.0, 1.0 - w);
        const double y0 = std::clamp(b.y0 + (unit(rng) - 0.3) * b.height(), 0.0, 1.0 - h);
        a = {x0, y0, x0 + w, y0 + h};
      } else if (s == 3) {
        // Equal offsets on both axes to hit the dominant-axis tie.
        const double d = (unit(rng) - 0.5) * 0.5;
        const double w = 0.1, h = 0.1;
        const double x0 = 0.3 + 0.2 * unit(rng), y0 = 0.3 + 0.2 * unit(rng);
        a = {x0, y0, x0 + w, y0 + h};
        const double e = unit(rng) < 0.5 ? d : -d;
        b = {x0 + d, y0 + e, x0 + d + w, y0 + e + h};
        if (!IsValid(b)) b = RandomBox(rng, true);
      }
      double da = 1.0 + 9.0 * unit(rng);
      double db = s == 1 ? da * (1.0 + 0.02 * (unit(rng) < 0.5 ? 1 : -1)) : 1.0 + 9.0 * unit(rng);
      if (s == 3) db = da;
      ++total;
      const bool got = eval(kind, a, b, da, db);
      const bool want = table.Holds(kind, a, b, da, db);
      if (got) ++positives[std::string(ToString(kind))];
      if (got != want) {
        ++mismatches;
        o.Fail(std::string(ToString(kind)) + " on " + ToString(a) + ", " + ToString(b) + ": engine " +
               (got ? "true" : "false") + ", oracle " + (want ? "true" : "false"));
      }
      for (double f : {0.5, 0.25}) {
        if (eval(kind, Scaled(a, f), Scaled(b, f), da * f, db * f) != got) {
          ++scale_breaks;
          o.Fail(std::string(ToString(kind)) + " changes under scale " + std::to_string(f));
        }
      }
      const RelationKind conv = converse(kind);
      if (conv != kind && eval(conv, b, a, db, da) != got) {
        ++symmetry_breaks;
        o.Fail(std::string(ToString(kind)) + "(A,B) != " + std::string(ToString(conv)) + "(B,A)");
      }
      if ((IsDirectional(kind) || IsDepthRelation(kind) || kind == RelationKind::kOn) && got &&
          eval(kind, b, a, db, da)) {
        ++symmetry_breaks;
        o.Fail(std::string(ToString(kind)) + " holds both ways");
      }
      if (kind == RelationKind::kNextTo && eval(kind, b, a, db, da) != got) {
        ++symmetry_breaks;
        o.Fail("next_to is not symmetric");
      }
    }
  }
  std::ostringstream d;
  d << total << " pairs, " << mismatches << " oracle mismatches, " << scale_breaks << " scale breaks, "
    << symmetry_breaks << " antisymmetry breaks; positives";
  for (const auto& [k, n] : positives) d << " " << k << "=" << n;
  o.detail = d.str();
  for (RelationKind kind : kinds) {
    if (positives[std::string(ToString(kind))] == 0) o.Fail(std::string(ToString(kind)) + " never held");
  }
  Report("relation_dual_oracle", o, Seconds(start), kRelationBudget);
}

void PlantAgreement() {
  const auto start = Clock::now();
  Outcome o;
  const EngineConfig config;  // tau_pass 0.8
  const auto suite = RandomSuite(kPlantItems, 8080, DefaultTagMix(), config);
  int verdicts = 0, constraints = 0, constraint_total = 0, passing = 0;
  std::map<Tag, int> per_tag;
  for (const auto& spec : suite) {
    ++per_tag[spec.constraint_set.tag];
    try {
      const PlantResult plant = PlantScene(spec, config);
      const ScoreReport report = ScoreOnScene(spec.constraint_set, plant.scene, config);
      if (report.verdict == plant.verdict) ++verdicts;
      else o.Fail("verdict differs on " + Serialize(spec));
      if (plant.verdict) ++passing;
      for (std::size_t i = 0; i < report.per_constraint.size() && i < plant.expected.size(); ++i) {
        ++constraint_total;
        if (report.per_constraint[i].pass == plant.expected[i].pass) ++constraints;
      }
      if (report.per_constraint.size() != plant.expected.size()) o.Fail("constraint count differs");
    } catch (const std::exception& e) {
      o.Fail(std::string("error: ") + e.what());
    }
  }
  if (verdicts != kPlantItems || static_cast<int>(suite.size()) != kPlantItems) o.pass = false;
  if (constraints != constraint_total) o.Fail("per-constraint pass flags differ");
  if (per_tag.size() != kAllTags.size()) o.Fail("suite does not cover every tag");
  std::ostringstream d;
  d << verdicts << "/" << kPlantItems << " verdicts, " << constraints << "/" << constraint_total
    << " constraint pass flags, " << passing << " planted passes, " << per_tag.size() << " tags";
  o.detail = d.str();
  Report("plant_agreement", o, Seconds(start), kPlantBudget);
}

void ExclusionExactness() {
  const auto start = Clock::now();
  Outcome o;
  const EngineConfig config;
  // Oversampled: sets whose every scene category is already excluded are skipped.
  const auto suite = RandomSuite(2 * kExclusionSets, 515, DefaultTagMix(), config);
  std::mt19937_64 rng(77);
  int checked = 0, fractional = 0;
  for (const auto& spec : suite) {
    if (checked == kExclusionSets) break;
    const PlantResult plant = PlantScene(spec, config);
    const ConstraintSet& base_set = spec.constraint_set;
    // Category present in the scene and unused by existing exclusions.
    std::vector<const SceneObject*> candidates;
    for (const auto& obj : plant.scene.objects) {
      bool used = false;
      for (const auto& e : base_set.exclusions) used = used || e.category == obj.category;
      if (!used) candidates.push_back(&obj);
    }
    if (candidates.empty()) continue;
    const SceneObject& pick = *candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    int n_same = 0;
    for (const auto& obj : plant.scene.objects) n_same += obj.category == pick.category;
    AtomicConstraint excl;
    excl.id = "e" + std::to_string(base_set.inclusions.size() + base_set.exclusions.size() + 1);
    excl.category = pick.category;
    const int target = std::uniform_int_distribution<int>(1, 4)(rng);
    excl.count = target;
    if (std::bernoulli_distribution(0.5)(rng)) excl.color = pick.color;
    ConstraintSet with = base_set;
    with.exclusions.push_back(excl);

    const ScoreReport before = ScoreOnScene(base_set, plant.scene, config);
    const ScoreReport after = ScoreOnScene(with, plant.scene, config);
    double s = -1.0;
    for (const auto& r : after.per_constraint) {
      if (r.entity_id == excl.id) s = r.composed;
    }
    const double s_oracle = std::exp(-std::fabs(static_cast<double>(n_same - target)));
    ++checked;
    if (std::fabs(s - s_oracle) > kFormulaTol) o.Fail("exclusion score " + std::to_string(s) + " vs " + std::to_string(s_oracle));
    if (s > 0 && s < 1) ++fractional;
    if (after.raw_total != before.raw_total - s) {
      std::ostringstream m;
      m.precision(17);
      m << "raw " << before.raw_total << " -> " << after.raw_total << " with s = " << s;
      o.Fail(m.str());
    }
    if (after.normalized_total > before.normalized_total) o.Fail("normalized total increased");
  }
  if (checked != kExclusionSets) o.Fail("only " + std::to_string(checked) + " eligible sets");
  o.detail = std::to_string(checked) + " sets, raw drops by exactly s (" + std::to_string(fractional) +
             " with 0 < s < 1), normalized never increases";
  Report("exclusion_exactness", o, Seconds(start), kExclusionBudget);
}

void Determinism() {
  const auto start = Clock::now();
  Outcome o;
  const fs::path dir = WorkDir() / "determinism";
  fs::create_directories(dir);
  const std::string manifest = (dir / "suite.jsonl").string();
  const Proc suite = RunCli("suite --n " + std::to_string(kPlantItems) + " --seed 99 --manifest " + Quote(manifest));
  if (suite.status != 0) o.Fail("suite exited " + std::to_string(suite.status));
  auto bench = [&](int jobs, const std::string& name, const std::string& format) {
    const fs::path out = dir / name;
    const Proc p = RunCli("bench --manifest " + Quote(manifest) + " --jobs " + std::to_string(jobs) + " --format " +
                          format + " --out " + Quote(out.string()));
    if (p.status != 0) o.Fail("bench --jobs " + std::to_string(jobs) + " exited " + std::to_string(p.status));
    return Slurp(out);
  };
  const std::string j1 = bench(1, "j1.json", "json");
  const std::string j8 = bench(8, "j8.json", "json");
  const std::string j1b = bench(1, "j1b.json", "json");
  const std::string j8b = bench(8, "j8b.json", "json");
  const std::string m1 = bench(1, "j1.md", "md");
  const std::string m8 = bench(8, "j8.md", "md");
  if (j1.empty()) o.Fail("empty report");
  if (j1 != j8) o.Fail("--jobs 1 and --jobs 8 JSON reports differ");
  if (j1 != j1b || j8 != j8b) o.Fail("repeated runs differ");
  if (m1 != m8) o.Fail("markdown reports differ");
  if (Slurp(manifest) != [&] {
        const std::string again = (dir / "suite2.jsonl").string();
        RunCli("suite --n " + std::to_string(kPlantItems) + " --seed 99 --manifest " + Quote(again));
        return Slurp(again);
      }()) {
    o.Fail("suite generation is not reproducible");
  }
  int items = 0;
  try {
    items = Json::parse(j1).at("items").get<int>();
  } catch (const std::exception&) {
    o.Fail("report is not JSON");
  }
  if (items != kPlantItems) o.Fail("report covers " + std::to_string(items) + " items");
  o.detail = std::to_string(items) + "-item suite, " + std::to_string(j1.size()) +
             "-byte report identical across --jobs 1/8 and reruns";
  Report("determinism", o, Seconds(start), 0);
}

void ServiceParity() {
  const auto start = Clock::now();
  Outcome o;
  const fs::path dir = WorkDir() / "parity";
  fs::create_directories(dir);
  ScoringService service(Settings{}, nullptr);
  const int port = service.Bind("127.0.0.1", 0);
  if (port <= 0) {
    o.Fail("could not bind");
    Report("service_parity", o, Seconds(start), 0);
    return;
  }
  std::thread server([&] { service.Serve(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);

  const auto suite = RandomSuite(kParityRequests, 3131, DefaultTagMix());
  std::mt19937_64 rng(5);
  int identical = 0;
  for (int i = 0; i < kParityRequests; ++i) {
    const PlantSpec& spec = suite[i];
    const SceneGraph scene = PlantScene(spec).scene;
    const fs::path scene_file = dir / ("scene" + std::to_string(i) + ".json");
    std::ofstream(scene_file) << Serialize(scene);
    Json body;
    std::string args = "score --scene " + Quote(scene_file.string());
    if (std::bernoulli_distribution(0.5)(rng)) {
      body["prompt"] = spec.constraint_set.prompt;
      args += " --prompt " + Quote(spec.constraint_set.prompt);
    } else {
      const fs::path set_file = dir / ("set" + std::to_string(i) + ".json");
      std::ofstream(set_file) << Serialize(spec.constraint_set);
      body["constraints"] = ToJson(spec.constraint_set);
      args += " --constraints " + Quote(set_file.string());
    }
    body["image"] = "images/item" + std::to_string(i) + ".png";
    args += " --image " + Quote(body["image"].get<std::string>());
    body["scene"] = ToJson(scene);
    Json config = Json::object();
    const double taus[] = {0.5, 0.8, 0.9};
    const double tau = taus[std::uniform_int_distribution<int>(0, 2)(rng)];
    if (tau != 0.8) {
      config["tau_pass"] = tau;
      args += " --tau-pass " + std::to_string(tau);
    }
    if (std::bernoulli_distribution(0.3)(rng)) {
      config["relations"] = "cot";
      args += " --relations cot";
    }
    if (!config.empty()) body["config"] = config;
    if (std::bernoulli_distribution(0.3)(rng)) {
      body["format"] = "md";
      args += " --format md";
    }
    const Proc cli = RunCli(args);
    auto res = client.Post("/v1/score", body.dump(), "application/json");
    if (!res) {
      o.Fail("request " + std::to_string(i) + " got no reply");
      continue;
    }
    if (cli.status != 0 && cli.status != 1) o.Fail("cli exited " + std::to_string(cli.status) + " on request " + std::to_string(i));
    if (res->status != 200) o.Fail("request " + std::to_string(i) + " returned " + std::to_string(res->status));
    if (res->body == cli.out && !cli.out.empty()) ++identical;
    else o.Fail("request " + std::to_string(i) + " differs from cli output");
  }
  service.Stop();
  server.join();
  o.detail = std::to_string(identical) + "/" + std::to_string(kParityRequests) + " responses byte-identical to cli";
  if (identical != kParityRequests) o.pass = false;
  Report("service_parity", o, Seconds(start), 0);
}

// Max over injective partial maps binding min(rows, cols) rows.
double ExhaustiveBest(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows ? w[0].size() : 0;
  const std::size_t need = std::min(rows, cols);
  double best = -1.0;
  std::vector<int> pick(rows, -1);
  std::vector<bool> used(cols, false);
  std::function<void(std::size_t, std::size_t, double)> go = [&](std::size_t r, std::size_t bound, double sum) {
    if (r == rows) {
      if (bound == need) best = std::max(best, sum);
      return;
    }
    if (rows - r > need - bound) go(r + 1, bound, sum);  // leave row r unbound
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = true;
      go(r + 1, bound + 1, sum + w[r][c]);
      used[c] = false;
    }
  };
  go(0, 0, 0.0);
  return std::max(best, 0.0);
}

void BindingOptimality() {
  const auto start = Clock::now();
  Outcome o;
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Matrices, including rectangular ones and many ties.
  for (int t = 0; t < kBindingMatrices; ++t) {
    const int rows = size(rng), cols = size(rng);
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto& row : w) {
      for (auto& v : row) v = t % 2 ? std::round(unit(rng) * 4) / 4 : unit(rng);
    }
    const Assignment a = MaxWeightAssignment(w);
    int bound = 0;
    std::vector<bool> used(cols, false);
    for (const auto& x : a) {
      if (!x) continue;
      ++bound;
      if (used[*x]) o.Fail("detection bound twice");
      used[*x] = true;
    }
    if (bound != std::min(rows, cols)) o.Fail("assignment is not maximum cardinality");
    const double got = AssignmentValue(w, a), want = ExhaustiveBest(w);
    if (std::fabs(got - want) > kBindingTol) o.Fail("matrix " + std::to_string(t) + ": " + std::to_string(got) + " < " + std::to_string(want));
  }

  // End-to-end scenes: entities of one category against up to four detections.
  const char* colors[] = {"red", "blue", "green", "white"};
  const char* words[] = {"OPEN", "OPENS", "SALE", "SOLE", "EXIT"};
  int scenes = 0;
  for (int t = 0; t < kBindingScenes; ++t) {
    const int k = size(rng), m = size(rng);
    SceneGraph scene;
    for (int j = 0; j < m; ++j) {
      // Non-overlapping columns so every detection resolves to itself.
      const double x0 = 0.02 + 0.245 * j;
      const double w = 0.1 + 0.1 * unit(rng);
      const double y0 = 0.1 + 0.3 * unit(rng);
      SceneObject obj{"o" + std::to_string(j), "cup", {x0, y0, x0 + w, y0 + 0.3},
                      colors[std::uniform_int_distribution<int>(0, 3)(rng)],
                      45.0 * std::uniform_int_distribution<int>(0, 7)(rng), 1.0};
      scene.objects.push_back(obj);
      if (unit(rng) < 0.7) {
        const double tw = w * (0.4 + 0.8 * unit(rng));
        const double tx = x0 + (unit(rng) - 0.3) * w;
        BBox tb{std::max(0.0, tx), y0 + 0.05, std::min(1.0, tx + tw), y0 + 0.12};
        scene.texts.push_back({words[std::uniform_int_distribution<int>(0, 4)(rng)], tb});
      }
    }
    ConstraintSet set;
    set.tag = Tag::kComplex;
    for (int i = 0; i < k; ++i) {
      AtomicConstraint c;
      c.id = "e" + std::to_string(i + 1);
      c.category = "cup";
      if (unit(rng) < 0.6) c.color = colors[std::uniform_int_distribution<int>(0, 3)(rng)];
      if (unit(rng) < 0.4) {
        c.orientation = OrientationTarget{45.0 * std::uniform_int_distribution<int>(0, 7)(rng),
                                          OrientationMode::kCategorical8};
      }
      if (unit(rng) < 0.5) c.text = words[std::uniform_int_distribution<int>(0, 4)(rng)];
      set.inclusions.push_back(c);
    }
    // Independent pair scores.
    std::vector<std::vector<double>> w(k, std::vector<double>(m));
    for (int i = 0; i < k; ++i) {
      const auto& c = set.inclusions[i];
      for (int j = 0; j < m; ++j) {
        const auto& obj = scene.objects[j];
        double s = 1.0;
        if (c.color) s *= *c.color == obj.color ? 1.0 : 0.0;
        if (c.orientation) s *= oracle::AngleGap(obj.orientation_degrees, c.orientation->degrees) <= 45.0 ? 1.0 : 0.0;
        if (c.text) {
          std::vector<TextDetection> dets;
          for (const auto& tx : scene.texts) dets.push_back({tx.text, tx.box, 1.0});
          s *= oracle::TextBrute(*c.text, obj.box, dets);
        }
        w[i][j] = s;
      }
    }
    const double want = ExhaustiveBest(w);
    const ScoreReport report = ScoreOnScene(set, scene);
    double got = 0.0;
    int bound = 0;
    for (const auto& r : report.per_constraint) {
      if (!r.facets.bound_box) continue;
      ++bound;
      double s = 1.0;
      if (r.facets.color) s *= *r.facets.color;
      if (r.facets.orientation) s *= *r.facets.orientation;
      if (r.facets.text) s *= *r.facets.text;
      got += s;
    }
    ++scenes;
    if (bound != std::min(k, m)) o.Fail("scene " + std::to_string(t) + ": bound " + std::to_string(bound));
    if (std::fabs(got - want) > kBindingTol) {
      o.Fail("scene " + std::to_string(t) + ": binding value " + std::to_string(got) + " vs optimum " + std::to_string(want));
    }
  }
  o.detail = std::to_string(kBindingMatrices) + " matrices and " + std::to_string(scenes) +
             " scenes with <= 4 same-category detections match the exhaustive optimum";
  Report("binding_optimality", o, Seconds(start), 0);
}

}  // namespace

int main() {
  FormulaExactness();
  TextRewardOracle();
  RelationDualOracle();
  PlantAgreement();
  ExclusionExactness();
  Determinism();
  ServiceParity();
  BindingOptimality();
  std::error_code ec;
  fs::remove_all(WorkDir(), ec);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}

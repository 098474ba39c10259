// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/subrewards.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "spatrwd/constraint.hpp"
#include "spatrwd/unicode_text.hpp"

namespace spatrwd {

double PresenceReward(std::size_t n_detected) { return n_detected > 0 ? 1.0 : 0.0; }

double CountReward(std::size_t n_detected, int n_target) {
  const long long diff = static_cast<long long>(n_detected) - n_target;
  return std::exp(-static_cast<double>(std::llabs(diff)));
}

double ColorReward(std::string_view detected, std::string_view target) {
  auto a = NormalizeColor(detected);
  auto b = NormalizeColor(target);
  return a && b && *a == *b ? 1.0 : 0.0;
}

double CircularDistance(double a_degrees, double b_degrees) {
  double d = std::fabs(std::fmod(a_degrees - b_degrees, 360.0));
  return std::min(d, 360.0 - d);
}

double OrientationReward(double detected, double target, double tolerance) {
  return CircularDistance(detected, target) <= tolerance ? 1.0 : 0.0;
}

double DepthReward(int rank_detected, int rank_target) {
  return std::exp(-static_cast<double>(std::abs(rank_detected - rank_target)));
}

std::vector<int> DepthRanks(std::span<const double> depths, std::span<const double> x0) {
  std::vector<std::size_t> order(depths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (depths[a] != depths[b]) return depths[a] < depths[b];
    return x0[a] < x0[b];
  });
  std::vector<int> ranks(depths.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r) + 1;
  return ranks;
}

std::size_t EditDistance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double LexicalSimilarity(std::string_view target, std::string_view detected) {
  const std::u32string a = text::CodePoints(text::MatchKey(target));
  const std::u32string b = text::CodePoints(text::MatchKey(detected));
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(EditDistance(a, b)) / static_cast<double>(longest);
}

double TextReward(std::string_view target, const BBox& obj_box,
                  std::span<const TextDetection> detections) {
  // Visit candidates by IoA descending; once IoA cannot beat the best product
  // (sim <= 1), nothing later can either.
  std::vector<std::pair<double, std::size_t>> by_ioa;
  by_ioa.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    by_ioa.emplace_back(Ioa(detections[i].box, obj_box), i);
  }
  std::sort(by_ioa.begin(), by_ioa.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  double best = 0.0;
  for (const auto& [ioa, i] : by_ioa) {
    if (ioa <= best) break;
    best = std::max(best, LexicalSimilarity(target, detections[i].text) * ioa);
  }
  return best;
}

std::string_view ToString(Facet facet) {
  switch (facet) {
    case Facet::kPresence: return "presence";
    case Facet::kCount: return "count";
    case Facet::kColor: return "color";
    case Facet::kOrientation: return "orientation";
    case Facet::kDepth: return "depth";
    case Facet::kText: return "text";
    case Facet::kRelation: return "relation";
  }
  return "?";
}

std::optional<Facet> ParseFacet(std::string_view name) {
  for (Facet f : {Facet::kPresence, Facet::kCount, Facet::kColor, Facet::kOrientation,
                  Facet::kDepth, Facet::kText, Facet::kRelation}) {
    if (ToString(f) == name) return f;
  }
  return std::nullopt;
}

std::vector<std::pair<Facet, double>> SubRewardVector::Present() const {
  std::vector<std::pair<Facet, double>> out;
  auto add = [&](Facet f, const std::optional<double>& v) {
    if (v) out.emplace_back(f, *v);
  };
  add(Facet::kPresence, presence);
  add(Facet::kCount, count);
  add(Facet::kColor, color);
  add(Facet::kOrientation, orientation);
  add(Facet::kDepth, depth);
  add(Facet::kText, text);
  return out;
}

Json SubRewardVector::ToJson() const {
  Json out = Json::object();
  for (const auto& [facet, value] : Present()) out[std::string(ToString(facet))] = value;
  return out;
}

double ComposeScore(const SubRewardVector& facets, std::optional<double> relation) {
  if (facets.presence && *facets.presence == 0.0) return 0.0;
  double score = 1.0;
  for (const auto& [facet, value] : facets.Present()) score *= value;
  if (relation) score *= *relation;
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace spatrwd

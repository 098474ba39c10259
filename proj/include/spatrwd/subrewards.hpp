// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spatrwd/geometry.hpp"
#include "spatrwd/json_format.hpp"
#include "spatrwd/protocol.hpp"

namespace spatrwd {

double PresenceReward(std::size_t n_detected);
double CountReward(std::size_t n_detected, int n_target);
double ColorReward(std::string_view detected, std::string_view target);

// min(|a - b|, 360 - |a - b|) after reducing both angles mod 360.
double CircularDistance(double a_degrees, double b_degrees);
double OrientationReward(double detected, double target, double tolerance);

double DepthReward(int rank_detected, int rank_target);

// 1-based ranks of `depths` sorted ascending (nearest first), ties broken by
// x0 ascending and then by input position.
std::vector<int> DepthRanks(std::span<const double> depths, std::span<const double> x0);

// 1 - edit_distance / max_len over text::MatchKey code points. Both empty is 1.
double LexicalSimilarity(std::string_view target, std::string_view detected);
std::size_t EditDistance(std::u32string_view a, std::u32string_view b);

// max_j sim(target, T_j) * IoA(B_j, obj_box); 0 for an empty list.
double TextReward(std::string_view target, const BBox& obj_box,
                  std::span<const TextDetection> detections);

enum class Facet { kPresence, kCount, kColor, kOrientation, kDepth, kText, kRelation };
std::string_view ToString(Facet facet);
std::optional<Facet> ParseFacet(std::string_view name);

struct SubRewardVector {
  std::optional<double> presence;
  std::optional<double> count;
  std::optional<double> color;
  std::optional<double> orientation;
  std::optional<double> depth;
  std::optional<double> text;
  std::optional<BBox> bound_box;

  // Present facets in the fixed order presence, count, color, orientation,
  // depth, text.
  std::vector<std::pair<Facet, double>> Present() const;
  Json ToJson() const;  // present facets only
};

// Product of the present facets and the relation score; 0 whenever presence
// is 0.
double ComposeScore(const SubRewardVector& facets, std::optional<double> relation);

}  // namespace spatrwd

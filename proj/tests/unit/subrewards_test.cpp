// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "spatrwd/error.hpp"
#include "spatrwd/subrewards.hpp"

using namespace spatrwd;

TEST_CASE("count and depth rewards decay exponentially") {
  CHECK(std::fabs(CountReward(2, 3) - std::exp(-1.0)) < 1e-12);
  CHECK(CountReward(3, 3) == 1.0);
  CHECK(CountReward(0, 2) == doctest::Approx(std::exp(-2.0)));
  CHECK(std::fabs(DepthReward(3, 1) - std::exp(-2.0)) < 1e-12);
  CHECK(DepthReward(2, 2) == 1.0);
}

TEST_CASE("presence and color") {
  CHECK(PresenceReward(0) == 0.0);
  CHECK(PresenceReward(4) == 1.0);
  CHECK(ColorReward("Grey", "gray") == 1.0);
  CHECK(ColorReward("red", "blue") == 0.0);
  CHECK(ColorReward("mauve", "red") == 0.0);
}

TEST_CASE("orientation uses circular distance with an inclusive tolerance") {
  CHECK(OrientationReward(350.0, 10.0, 22.5) == 1.0);
  CHECK(CircularDistance(350.0, 10.0) == doctest::Approx(20.0));
  CHECK(CircularDistance(0.0, 180.0) == 180.0);
  CHECK(CircularDistance(-90.0, 270.0) == 0.0);
  CHECK(OrientationReward(90.0, 45.0, 45.0) == 1.0);
  CHECK(OrientationReward(91.0, 45.0, 45.0) == 0.0);
  CHECK(OrientationReward(180.0, 0.0, 45.0) == 0.0);
}

TEST_CASE("depth ranks are one-based with ties broken by x0") {
  const std::vector<double> depth{3.0, 1.0, 2.0};
  const std::vector<double> x0{0.0, 0.5, 0.2};
  CHECK(DepthRanks(depth, x0) == std::vector<int>{3, 1, 2});
  const std::vector<double> tied{1.0, 1.0};
  const std::vector<double> tx0{0.7, 0.1};
  CHECK(DepthRanks(tied, tx0) == std::vector<int>{2, 1});
}

TEST_CASE("lexical similarity") {
  CHECK(LexicalSimilarity("STOP", "stop") == 1.0);
  CHECK(LexicalSimilarity("STOP", "STOP!") == 1.0);
  CHECK(LexicalSimilarity("STOP", "SHOP") == doctest::Approx(0.75));
  CHECK(LexicalSimilarity("", "") == 1.0);
  CHECK(LexicalSimilarity("ab", "") == 0.0);
  CHECK(EditDistance(U"kitten", U"sitting") == 3);
}

TEST_CASE("text reward takes the best similarity times ioa") {
  const BBox obj{0.0, 0.0, 1.0, 1.0};
  std::vector<TextDetection> texts = {{"SHOP", {0.1, 0.1, 0.2, 0.2}, 0.9}, {"STOP", {0.9, 0.9, 1.1, 1.1}, 0.8}};
  // inside: 0.75 * 1 ; half-covered quarter: 1.0 * 0.25
  CHECK(TextReward("STOP", obj, texts) == doctest::Approx(0.75));
  CHECK(TextReward("STOP", obj, {}) == 0.0);
}

TEST_CASE("text reward matches brute force on random instances") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> words = {"STOP", "SHOP", "stop", "OPEN", "PEN", "EXIT", "EXITS", ""};
  for (int trial = 0; trial < 500; ++trial) {
    const BBox obj{u(gen) * 0.5, u(gen) * 0.5, 0.5 + u(gen) * 0.5, 0.5 + u(gen) * 0.5};
    std::vector<TextDetection> dets;
    const int n = static_cast<int>(gen() % 8);
    for (int i = 0; i < n; ++i) {
      const double x = u(gen), y = u(gen);
      dets.push_back({words[gen() % words.size()], {x, y, x + 0.01 + u(gen) * 0.3, y + 0.01 + u(gen) * 0.3}, 1.0});
    }
    const std::string target = words[gen() % (words.size() - 1)];
    double brute = 0.0;
    for (const auto& d : dets) brute = std::max(brute, LexicalSimilarity(target, d.text) * Ioa(d.box, obj));
    CHECK(TextReward(target, obj, dets) == brute);
  }
}

TEST_CASE("compose gates on presence and multiplies the rest") {
  SubRewardVector v;
  v.presence = 1.0;
  v.count = std::exp(-1.0);
  v.color = 1.0;
  CHECK(ComposeScore(v, std::nullopt) == doctest::Approx(std::exp(-1.0)));
  CHECK(ComposeScore(v, 0.0) == 0.0);
  v.presence = 0.0;
  CHECK(ComposeScore(v, 1.0) == 0.0);
}

TEST_CASE("sub-reward vectors list present facets in fixed order") {
  SubRewardVector v;
  v.text = 0.5;
  v.presence = 1.0;
  v.color = 0.0;
  const auto present = v.Present();
  REQUIRE(present.size() == 3);
  CHECK(present[0].first == Facet::kPresence);
  CHECK(present[1].first == Facet::kColor);
  CHECK(present[2].first == Facet::kText);
  CHECK(v.ToJson().dump() == R"({"presence":1.0,"color":0.0,"text":0.5})");
  CHECK(*ParseFacet("relation") == Facet::kRelation);
  CHECK_FALSE(ParseFacet("size"));
}

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spatrwd/error.hpp"
#include "spatrwd/fixture.hpp"
#include "spatrwd/relations.hpp"

using namespace spatrwd;

namespace {

double Geo(RelationKind k, const BBox& a, const BBox& b) { return EvaluateRelationGeometric(k, a, b, std::nullopt, {}); }

BBox At(double cx, double cy, double w = 0.1, double h = 0.1) { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }

}  // namespace

TEST_CASE("dominant-axis directional rules") {
  const BBox a = At(0.2, 0.5);
  const BBox b = At(0.8, 0.5);
  CHECK(Geo(RelationKind::kLeftOf, a, b) == 1.0);
  CHECK(Geo(RelationKind::kRightOf, a, b) == 0.0);
  CHECK(Geo(RelationKind::kRightOf, b, a) == 1.0);
  CHECK(Geo(RelationKind::kAbove, a, b) == 0.0);
  CHECK(Geo(RelationKind::kAbove, At(0.5, 0.1), At(0.5, 0.9)) == 1.0);
  CHECK(Geo(RelationKind::kBelow, At(0.5, 0.9), At(0.5, 0.1)) == 1.0);
  // diagonal with the vertical axis dominant is not left_of
  CHECK(Geo(RelationKind::kLeftOf, At(0.4, 0.1), At(0.5, 0.9)) == 0.0);
}

TEST_CASE("identical boxes satisfy no directional relation") {
  const BBox a = At(0.5, 0.5, 0.2, 0.3);
  for (RelationKind k : {RelationKind::kLeftOf, RelationKind::kRightOf, RelationKind::kAbove, RelationKind::kBelow}) {
    CHECK(Geo(k, a, a) == 0.0);
  }
}

TEST_CASE("offsets below the margin do not count") {
  // mean diagonal 0.1*sqrt(2); margin 0.05 of that is about 0.00707
  CHECK(Geo(RelationKind::kLeftOf, At(0.5, 0.5), At(0.505, 0.5)) == 0.0);
  CHECK(Geo(RelationKind::kLeftOf, At(0.5, 0.5), At(0.51, 0.5)) == 1.0);
}

TEST_CASE("on, inside and next_to") {
  const BBox table{0.2, 0.6, 0.8, 0.9};
  CHECK(Geo(RelationKind::kOn, {0.4, 0.4, 0.6, 0.6}, table) == 1.0);
  CHECK(Geo(RelationKind::kOn, {0.4, 0.3, 0.6, 0.5}, table) == 0.0);   // floating above
  CHECK(Geo(RelationKind::kOn, {0.85, 0.4, 0.95, 0.6}, table) == 0.0); // no overlap
  CHECK(Geo(RelationKind::kInside, {0.3, 0.65, 0.4, 0.8}, table) == 1.0);
  CHECK(Geo(RelationKind::kInside, {0.75, 0.65, 0.95, 0.8}, table) == 0.0);
  CHECK(Geo(RelationKind::kNextTo, At(0.3, 0.5), At(0.42, 0.5)) == 1.0);
  CHECK(Geo(RelationKind::kNextTo, At(0.1, 0.5), At(0.9, 0.5)) == 0.0);
  CHECK(Geo(RelationKind::kNextTo, At(0.5, 0.3), At(0.5, 0.42)) == 0.0);   // stacked
  CHECK(Geo(RelationKind::kNextTo, At(0.5, 0.5, 0.05, 0.05), At(0.5, 0.5, 0.4, 0.4)) == 0.0);  // contained
}

TEST_CASE("depth relations need depths and respect epsilon") {
  const BBox a = At(0.3, 0.5), b = At(0.7, 0.5);
  CHECK_THROWS_AS(Geo(RelationKind::kBehind, a, b), Error);
  const RelationConfig cfg;
  CHECK(EvaluateRelationGeometric(RelationKind::kBehind, a, b, DepthPair{3.0, 2.0, 3.0}, cfg) == 1.0);
  CHECK(EvaluateRelationGeometric(RelationKind::kBehind, a, b, DepthPair{3.0, 2.97, 3.0}, cfg) == 0.0);
  CHECK(EvaluateRelationGeometric(RelationKind::kInFrontOf, a, b, DepthPair{1.0, 2.0, 2.0}, cfg) == 1.0);
  CHECK(EvaluateRelationGeometric(RelationKind::kInFrontOf, a, b, DepthPair{2.0, 1.0, 2.0}, cfg) == 0.0);
  try {
    Geo(RelationKind::kOther, a, b);
    FAIL("expected UnsupportedRelation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupportedRelation);
  }
}

TEST_CASE("cot payload matches the golden file") {
  SubRewardVector subject;
  subject.presence = 1.0;
  subject.color = 1.0;
  SubRewardVector object;
  object.presence = 1.0;
  const Json payload =
      BuildCotPayload(MakeRelation("left_of", "e1", "e2"), "cup", "laptop", BBox{0.1, 0.4, 0.25, 0.55},
                      BBox{0.5, 0.35, 0.85, 0.6}, subject, object, ImageRef::Path("images/sample.png"));
  std::ifstream in(SPATRWD_TEST_DATA "/golden/cot_payload.json");
  std::stringstream golden;
  golden << in.rdbuf();
  CHECK(WriteJson(payload) + "\n" == golden.str());
  CHECK_THROWS_AS(BuildCotPayload(MakeRelation("left_of", "e1", "e2"), "cup", "laptop", std::nullopt,
                                  BBox{0.5, 0.35, 0.85, 0.6}, subject, object, ImageRef{}),
                  Error);
}

TEST_CASE("geometric cot responder reads depths from the scene") {
  SceneGraph scene;
  scene.objects.push_back({"a", "dog", At(0.3, 0.5), "brown", 0.0, 4.0});
  scene.objects.push_back({"b", "car", At(0.7, 0.5), "red", 0.0, 2.0});
  const CotResponder respond = GeometricCotResponder(scene, {});
  Json payload = BuildCotPayload(MakeRelation("behind", "e1", "e2"), "dog", "car", scene.objects[0].box,
                                 scene.objects[1].box, {}, {}, ImageRef{});
  CHECK(respond(payload).score == 1.0);
  payload["relation"]["name"] = "in_front_of";
  CHECK(respond(payload).score == 0.0);
}

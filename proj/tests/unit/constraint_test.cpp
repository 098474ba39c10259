// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "spatrwd/constraint.hpp"
#include "spatrwd/decompose.hpp"
#include "spatrwd/error.hpp"

using namespace spatrwd;

namespace {

ErrorKind KindOf(const std::string& doc) {
  try {
    ParseConstraintSet(std::string_view(doc));
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for " << doc);
  return ErrorKind::kInvalidArgument;
}

std::string MessageOf(const std::string& doc) {
  try {
    ParseConstraintSet(std::string_view(doc));
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("constraint sets survive a serialize/parse round trip") {
  for (const char* prompt : {"a cup to the left of a laptop", "three signs each labeled \"EXIT\"",
                             "a dog facing 30 degrees without a cat", "a red car and a blue bench",
                             "a cup, a book and a lamp from nearest to farthest"}) {
    const ConstraintSet set = DecomposeTemplate(prompt);
    CHECK(ParseConstraintSet(std::string_view(Serialize(set))) == set);
  }
}

TEST_CASE("dangling relation ids are rejected") {
  const std::string doc = R"({"schema_version":1,"tag":"position","prompt":"p","inclusions":[
    {"id":"e1","category":"cup","relation":{"name":"left_of","subject":"e1","object":"e9"}}],"exclusions":[]})";
  CHECK(KindOf(doc) == ErrorKind::kDanglingRelationId);
}

TEST_CASE("schema violations carry a field path") {
  const std::string doc = R"({"schema_version":1,"tag":"counting","prompt":"p","inclusions":[
    {"id":"e1","category":"cup","count":0}],"exclusions":[]})";
  CHECK(KindOf(doc) == ErrorKind::kSchemaViolation);
  CHECK(MessageOf(doc).find("inclusions[0].count") != std::string::npos);
  const std::string bad_color = R"({"schema_version":1,"tag":"color","prompt":"p","inclusions":[
    {"id":"e1","category":"cup","color":"chartreuse"}],"exclusions":[]})";
  CHECK(MessageOf(bad_color).find("inclusions[0].color") != std::string::npos);
  CHECK(KindOf(R"({"schema_version":2,"tag":"color","prompt":"p","inclusions":[],"exclusions":[]})") ==
        ErrorKind::kSchemaViolation);
  CHECK(KindOf(R"({"schema_version":1,"tag":"nope","prompt":"p","inclusions":[],"exclusions":[]})") ==
        ErrorKind::kSchemaViolation);
  CHECK(KindOf("{not json") == ErrorKind::kSchemaViolation);
}

TEST_CASE("duplicate entity ids are rejected") {
  const std::string doc = R"({"schema_version":1,"tag":"two_object","prompt":"p","inclusions":[
    {"id":"e1","category":"cup"},{"id":"e1","category":"dog"}],"exclusions":[]})";
  CHECK(KindOf(doc) == ErrorKind::kSchemaViolation);
}

TEST_CASE("canonicalize is idempotent and normalizes case") {
  ConstraintSet set = DecomposeTemplate("a red cup without a cat and a dog");
  set.inclusions[0].category = "Cup";
  set.inclusions[0].color = "RED";
  std::swap(set.exclusions[0], set.exclusions[1]);
  const ConstraintSet once = Canonicalize(set);
  CHECK(once.inclusions[0].category == "cup");
  CHECK(*once.inclusions[0].color == "red");
  CHECK(EntityIdLess(once.exclusions[0].id, once.exclusions[1].id));
  CHECK(Canonicalize(once) == once);
}

TEST_CASE("color names normalize to the vocabulary") {
  CHECK(*NormalizeColor("Grey") == "gray");
  CHECK(*NormalizeColor(" RED ") == "red");
  CHECK(*NormalizeColor("violet") == "purple");
  CHECK_FALSE(NormalizeColor("teal").has_value());
}

TEST_CASE("entity ids order numerically") {
  CHECK(EntityIdLess("e2", "e10"));
  CHECK_FALSE(EntityIdLess("e10", "e2"));
  CHECK(EntityIdLess("e1", "e2"));
}

TEST_CASE("relation names map to kinds") {
  CHECK(MakeRelation("left_of", "a", "b").kind == RelationKind::kLeftOf);
  CHECK(MakeRelation("in_front_of", "a", "b").kind == RelationKind::kInFrontOf);
  const RelationSpec other = MakeRelation("holding", "a", "b");
  CHECK(other.kind == RelationKind::kOther);
  CHECK(other.Name() == "holding");
  CHECK(IsDepthRelation(RelationKind::kBehind));
  CHECK_FALSE(IsDirectional(RelationKind::kOn));
}

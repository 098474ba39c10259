// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spatrwd/json_format.hpp"

namespace spatrwd {

// Primary evaluation category of a prompt.
enum class Tag {
  kCounting,
  kColor,
  kPosition,
  kOrientation,
  kDepth3d,
  kTextPosition,
  kTextCount,
  kComplex,
  kSingleObject,
  kTwoObject,
};

inline constexpr std::array<Tag, 10> kAllTags = {
    Tag::kCounting,     Tag::kColor,     Tag::kPosition,     Tag::kOrientation,
    Tag::kDepth3d,      Tag::kTextPosition, Tag::kTextCount, Tag::kComplex,
    Tag::kSingleObject, Tag::kTwoObject};

std::string_view ToString(Tag tag);
std::optional<Tag> ParseTag(std::string_view name);

enum class OrientationMode { kCategorical8, kContinuous };

struct OrientationTarget {
  double degrees = 0.0;  // [0, 360)
  OrientationMode mode = OrientationMode::kCategorical8;
  friend bool operator==(const OrientationTarget&, const OrientationTarget&) = default;
};

enum class RelationKind {
  kLeftOf,
  kRightOf,
  kAbove,
  kBelow,
  kOn,
  kInside,
  kNextTo,
  kBehind,
  kInFrontOf,
  kOther,
};

struct RelationSpec {
  RelationKind kind = RelationKind::kOther;
  std::string other_name;  // free-text name, only for kOther
  std::string subject_id;
  std::string object_id;

  // Canonical wire name ("left_of", ...) or `other_name`.
  std::string Name() const;
  friend bool operator==(const RelationSpec&, const RelationSpec&) = default;
};

std::string_view ToString(RelationKind kind);
// Unknown names map to kOther with the name kept as other_name.
RelationSpec MakeRelation(std::string_view name, std::string subject,
                          std::string object);
bool IsDirectional(RelationKind kind);
bool IsDepthRelation(RelationKind kind);

struct AtomicConstraint {
  std::string id;
  std::string category;
  std::optional<int> count;
  std::optional<std::string> color;
  std::optional<OrientationTarget> orientation;
  std::optional<int> depth_rank;  // 1 = nearest
  std::optional<std::string> text;
  std::optional<RelationSpec> relation;

  // True when no facet other than presence is constrained.
  bool IsPurePresence() const;
  friend bool operator==(const AtomicConstraint&, const AtomicConstraint&) = default;
};

struct ConstraintSet {
  Tag tag = Tag::kSingleObject;
  std::string prompt;
  std::vector<AtomicConstraint> inclusions;
  std::vector<AtomicConstraint> exclusions;

  const AtomicConstraint* Find(std::string_view id) const;
  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

// Closed color vocabulary.
inline constexpr std::array<std::string_view, 11> kColorVocabulary = {
    "red", "orange", "yellow", "green", "blue", "purple",
    "pink", "brown", "black", "white", "gray"};

// Lowercases, applies the synonym table (grey -> gray, violet -> purple) and
// returns the vocabulary term, or nullopt for anything outside it.
std::optional<std::string> NormalizeColor(std::string_view name);

// Validates every invariant of the set; throws kSchemaViolation or
// kDanglingRelationId with a field path.
void Validate(const ConstraintSet& set);

Json ToJson(const ConstraintSet& set);
std::string Serialize(const ConstraintSet& set);

// Parses and validates a decoded ConstraintSet document. Unknown fields are
// rejected. `path` prefixes every error location.
ConstraintSet ParseConstraintSet(const Json& doc, std::string_view path = "");
ConstraintSet ParseConstraintSet(std::string_view document);

// Lowercases categories and colors, NFC-normalizes text targets (case kept),
// sorts exclusions by entity id. Idempotent.
ConstraintSet Canonicalize(const ConstraintSet& set);

// Orders ids like "e2" before "e10": shorter first, then lexicographic.
bool EntityIdLess(std::string_view a, std::string_view b);

}  // namespace spatrwd

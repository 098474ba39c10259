// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spatrwd/error.hpp"
#include "spatrwd/unicode_text.hpp"

namespace spatrwd {
namespace {

constexpr int kSchemaVersion = 1;

struct RelationName {
  RelationKind kind;
  std::string_view name;
};

constexpr std::array<RelationName, 9> kRelationNames = {{
    {RelationKind::kLeftOf, "left_of"},
    {RelationKind::kRightOf, "right_of"},
    {RelationKind::kAbove, "above"},
    {RelationKind::kBelow, "below"},
    {RelationKind::kOn, "on"},
    {RelationKind::kInside, "inside"},
    {RelationKind::kNextTo, "next_to"},
    {RelationKind::kBehind, "behind"},
    {RelationKind::kInFrontOf, "in_front_of"},
}};

[[noreturn]] void Schema(std::string_view path, std::string_view what) {
  throw Error(ErrorKind::kSchemaViolation, std::string(path) + ": " + std::string(what));
}

std::string Join(std::string_view base, std::string_view field) {
  if (base.empty()) return std::string(field);
  if (!field.empty() && field.front() == '[') return std::string(base) + std::string(field);
  return std::string(base) + "." + std::string(field);
}

void RejectUnknown(const Json& obj, std::string_view path,
                   std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      Schema(Join(path, key), "unknown field");
    }
  }
}

const Json& Required(const Json& obj, std::string_view key, std::string_view path) {
  auto it = obj.find(key);
  if (it == obj.end()) Schema(Join(path, key), "missing required field");
  return *it;
}

std::string RequireString(const Json& v, std::string_view path) {
  if (!v.is_string()) Schema(path, "expected string");
  return v.get<std::string>();
}

int RequirePositiveInt(const Json& v, std::string_view path) {
  if (!v.is_number_integer()) Schema(path, "expected integer");
  const auto value = v.get<long long>();
  if (value < 1) Schema(path, "must be >= 1");
  if (value > 1000000) Schema(path, "out of range");
  return static_cast<int>(value);
}

Json ConstraintToJson(const AtomicConstraint& c) {
  Json out;
  out["id"] = c.id;
  out["category"] = c.category;
  if (c.count) out["count"] = *c.count;
  if (c.color) out["color"] = *c.color;
  if (c.orientation) {
    out["orientation"] = {
        {"degrees", c.orientation->degrees},
        {"mode", c.orientation->mode == OrientationMode::kCategorical8 ? "cat8" : "cont"}};
  }
  if (c.depth_rank) out["depth_rank"] = *c.depth_rank;
  if (c.text) out["text"] = *c.text;
  if (c.relation) {
    out["relation"] = {{"name", c.relation->Name()},
                       {"subject", c.relation->subject_id},
                       {"object", c.relation->object_id}};
  }
  return out;
}

AtomicConstraint ParseConstraint(const Json& v, const std::string& path) {
  if (!v.is_object()) Schema(path, "expected object");
  RejectUnknown(v, path,
                {"id", "category", "count", "color", "orientation", "depth_rank",
                 "text", "relation"});
  AtomicConstraint c;
  c.id = RequireString(Required(v, "id", path), Join(path, "id"));
  c.category = RequireString(Required(v, "category", path), Join(path, "category"));
  if (auto it = v.find("count"); it != v.end()) {
    c.count = RequirePositiveInt(*it, Join(path, "count"));
  }
  if (auto it = v.find("color"); it != v.end()) {
    c.color = RequireString(*it, Join(path, "color"));
  }
  if (auto it = v.find("orientation"); it != v.end()) {
    const std::string opath = Join(path, "orientation");
    if (!it->is_object()) Schema(opath, "expected object");
    RejectUnknown(*it, opath, {"degrees", "mode"});
    const Json& deg = Required(*it, "degrees", opath);
    if (!deg.is_number()) Schema(Join(opath, "degrees"), "expected number");
    const std::string mode = RequireString(Required(*it, "mode", opath), Join(opath, "mode"));
    OrientationTarget target;
    target.degrees = deg.get<double>();
    if (mode == "cat8") {
      target.mode = OrientationMode::kCategorical8;
    } else if (mode == "cont") {
      target.mode = OrientationMode::kContinuous;
    } else {
      Schema(Join(opath, "mode"), "expected \"cat8\" or \"cont\"");
    }
    c.orientation = target;
  }
  if (auto it = v.find("depth_rank"); it != v.end()) {
    c.depth_rank = RequirePositiveInt(*it, Join(path, "depth_rank"));
  }
  if (auto it = v.find("text"); it != v.end()) {
    c.text = RequireString(*it, Join(path, "text"));
  }
  if (auto it = v.find("relation"); it != v.end()) {
    const std::string rpath = Join(path, "relation");
    if (!it->is_object()) Schema(rpath, "expected object");
    RejectUnknown(*it, rpath, {"name", "subject", "object"});
    c.relation = MakeRelation(
        RequireString(Required(*it, "name", rpath), Join(rpath, "name")),
        RequireString(Required(*it, "subject", rpath), Join(rpath, "subject")),
        RequireString(Required(*it, "object", rpath), Join(rpath, "object")));
  }
  return c;
}

void ValidateConstraint(const AtomicConstraint& c, const std::string& path) {
  if (c.id.empty()) Schema(Join(path, "id"), "must be non-empty");
  if (text::CollapseWhitespace(c.category).empty()) {
    Schema(Join(path, "category"), "must be non-empty");
  }
  if (c.count && *c.count < 1) Schema(Join(path, "count"), "must be >= 1");
  if (c.color && !NormalizeColor(*c.color)) {
    Schema(Join(path, "color"), "\"" + *c.color + "\" is not in the color vocabulary");
  }
  if (c.orientation) {
    const double d = c.orientation->degrees;
    if (!std::isfinite(d) || d < 0.0 || d >= 360.0) {
      Schema(Join(path, "orientation.degrees"), "must lie in [0, 360)");
    }
  }
  if (c.depth_rank && *c.depth_rank < 1) Schema(Join(path, "depth_rank"), "must be >= 1");
  if (c.text && c.text->empty()) Schema(Join(path, "text"), "must be non-empty");
  if (c.relation) {
    const RelationSpec& r = *c.relation;
    if (r.Name().empty()) Schema(Join(path, "relation.name"), "must be non-empty");
    if (r.subject_id == r.object_id) {
      Schema(Join(path, "relation"), "subject and object must differ");
    }
  }
}

}  // namespace

std::string_view ToString(Tag tag) {
  switch (tag) {
    case Tag::kCounting: return "counting";
    case Tag::kColor: return "color";
    case Tag::kPosition: return "position";
    case Tag::kOrientation: return "orientation";
    case Tag::kDepth3d: return "depth3d";
    case Tag::kTextPosition: return "text_position";
    case Tag::kTextCount: return "text_count";
    case Tag::kComplex: return "complex";
    case Tag::kSingleObject: return "single_object";
    case Tag::kTwoObject: return "two_object";
  }
  return "single_object";
}

std::optional<Tag> ParseTag(std::string_view name) {
  for (Tag t : kAllTags) {
    if (ToString(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view ToString(RelationKind kind) {
  for (const auto& entry : kRelationNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "other";
}

std::string RelationSpec::Name() const {
  if (kind == RelationKind::kOther) return other_name;
  return std::string(ToString(kind));
}

RelationSpec MakeRelation(std::string_view name, std::string subject, std::string object) {
  RelationSpec r;
  r.subject_id = std::move(subject);
  r.object_id = std::move(object);
  for (const auto& entry : kRelationNames) {
    if (entry.name == name) {
      r.kind = entry.kind;
      return r;
    }
  }
  r.kind = RelationKind::kOther;
  r.other_name = std::string(name);
  return r;
}

bool IsDirectional(RelationKind kind) {
  return kind == RelationKind::kLeftOf || kind == RelationKind::kRightOf ||
         kind == RelationKind::kAbove || kind == RelationKind::kBelow;
}

bool IsDepthRelation(RelationKind kind) {
  return kind == RelationKind::kBehind || kind == RelationKind::kInFrontOf;
}

bool AtomicConstraint::IsPurePresence() const {
  return !count && !color && !orientation && !depth_rank && !text && !relation;
}

const AtomicConstraint* ConstraintSet::Find(std::string_view id) const {
  for (const auto* list : {&inclusions, &exclusions}) {
    for (const auto& c : *list) {
      if (c.id == id) return &c;
    }
  }
  return nullptr;
}

std::optional<std::string> NormalizeColor(std::string_view name) {
  std::string key = text::CollapseWhitespace(text::Lower(name));
  if (key == "grey") key = "gray";
  if (key == "violet") key = "purple";
  for (std::string_view term : kColorVocabulary) {
    if (term == key) return key;
  }
  return std::nullopt;
}

void Validate(const ConstraintSet& set) {
  if (set.inclusions.empty()) Schema("inclusions", "must contain at least one constraint");
  std::set<std::string, std::less<>> ids;
  auto check_list = [&](const std::vector<AtomicConstraint>& list, std::string_view name) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = std::string(name) + "[" + std::to_string(i) + "]";
      ValidateConstraint(list[i], path);
      if (!ids.insert(list[i].id).second) {
        Schema(path + ".id", "duplicate entity id \"" + list[i].id + "\"");
      }
    }
  };
  check_list(set.inclusions, "inclusions");
  check_list(set.exclusions, "exclusions");
  auto check_refs = [&](const std::vector<AtomicConstraint>& list, std::string_view name) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].relation) continue;
      const std::string path = std::string(name) + "[" + std::to_string(i) + "].relation";
      for (const std::string* ref : {&list[i].relation->subject_id, &list[i].relation->object_id}) {
        if (!ids.contains(*ref)) {
          throw Error(ErrorKind::kDanglingRelationId,
                      path + ": references unknown entity \"" + *ref + "\"");
        }
      }
    }
  };
  check_refs(set.inclusions, "inclusions");
  check_refs(set.exclusions, "exclusions");
}

Json ToJson(const ConstraintSet& set) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["tag"] = std::string(ToString(set.tag));
  out["prompt"] = set.prompt;
  out["inclusions"] = Json::array();
  for (const auto& c : set.inclusions) out["inclusions"].push_back(ConstraintToJson(c));
  out["exclusions"] = Json::array();
  for (const auto& c : set.exclusions) out["exclusions"].push_back(ConstraintToJson(c));
  return out;
}

std::string Serialize(const ConstraintSet& set) { return ToJson(set).dump(); }

ConstraintSet ParseConstraintSet(const Json& doc, std::string_view path) {
  const std::string base(path);
  if (!doc.is_object()) Schema(base.empty() ? "$" : base, "expected object");
  RejectUnknown(doc, base, {"schema_version", "tag", "prompt", "inclusions", "exclusions"});
  if (auto it = doc.find("schema_version"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() != kSchemaVersion) {
      Schema(Join(base, "schema_version"), "unsupported schema version");
    }
  }
  ConstraintSet set;
  const std::string tag = RequireString(Required(doc, "tag", base), Join(base, "tag"));
  auto parsed_tag = ParseTag(tag);
  if (!parsed_tag) Schema(Join(base, "tag"), "unknown tag \"" + tag + "\"");
  set.tag = *parsed_tag;
  set.prompt = RequireString(Required(doc, "prompt", base), Join(base, "prompt"));
  auto parse_list = [&](std::string_view key, bool required) {
    std::vector<AtomicConstraint> out;
    auto it = doc.find(key);
    if (it == doc.end()) {
      if (required) Schema(Join(base, key), "missing required field");
      return out;
    }
    if (!it->is_array()) Schema(Join(base, key), "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      out.push_back(ParseConstraint((*it)[i], Join(base, key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  };
  set.inclusions = parse_list("inclusions", true);
  set.exclusions = parse_list("exclusions", false);
  try {
    Validate(set);
  } catch (const Error& e) {
    if (base.empty()) throw;
    throw Error(e.kind(), base + "." + e.detail());
  }
  return set;
}

ConstraintSet ParseConstraintSet(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("$: invalid JSON: ") + e.what());
  }
  return ParseConstraintSet(doc);
}

bool EntityIdLess(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

ConstraintSet Canonicalize(const ConstraintSet& set) {
  ConstraintSet out = set;
  auto fix = [](AtomicConstraint& c) {
    c.category = text::CollapseWhitespace(text::Lower(text::Nfc(c.category)));
    if (c.color) {
      if (auto normalized = NormalizeColor(*c.color)) c.color = *normalized;
    }
    if (c.text) c.text = text::Nfc(*c.text);
    if (c.relation && c.relation->kind == RelationKind::kOther) {
      c.relation = MakeRelation(text::CollapseWhitespace(text::Lower(c.relation->other_name)),
                                c.relation->subject_id, c.relation->object_id);
    }
  };
  std::for_each(out.inclusions.begin(), out.inclusions.end(), fix);
  std::for_each(out.exclusions.begin(), out.exclusions.end(), fix);
  std::stable_sort(out.exclusions.begin(), out.exclusions.end(),
                   [](const AtomicConstraint& a, const AtomicConstraint& b) {
                     return EntityIdLess(a.id, b.id);
                   });
  return out;
}

}  // namespace spatrwd

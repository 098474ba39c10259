// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/report.hpp"

#include <sstream>

namespace spatrwd {
namespace {

std::string BoxCell(const std::optional<BBox>& box) {
  if (!box) return "-";
  return "(" + FormatReal(box->x0) + ", " + FormatReal(box->y0) + ", " + FormatReal(box->x1) + ", " +
         FormatReal(box->y1) + ")";
}

std::string EscapeCell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace

std::optional<ReportFormat> ParseReportFormat(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  return std::nullopt;
}

Json RelationVerdictToJson(const RelationVerdict& v) {
  Json out;
  out["name"] = v.relation.Name();
  out["subject"] = v.relation.subject_id;
  out["object"] = v.relation.object_id;
  out["path"] = v.path == RelationPath::kCot ? "cot" : "geometric";
  out["score"] = v.score;
  Json evidence;
  evidence["subject_box"] = v.subject_box ? BoxToJson(*v.subject_box) : Json(nullptr);
  evidence["object_box"] = v.object_box ? BoxToJson(*v.object_box) : Json(nullptr);
  if (v.reasoning) evidence["reasoning"] = *v.reasoning;
  if (v.clamped) evidence["clamped"] = true;
  out["evidence"] = evidence;
  return out;
}

Json ToJson(const ScoreReport& report) {
  Json out;
  out["schema_version"] = 1;
  out["prompt"] = report.constraints.prompt;
  out["tag"] = std::string(ToString(report.constraints.tag));
  out["decomposer"] = report.decomposer;
  out["constraints"] = ToJson(report.constraints);
  out["per_constraint"] = Json::array();
  for (const auto& r : report.per_constraint) {
    Json c;
    c["entity_id"] = r.entity_id;
    c["role"] = r.role == Role::kInclusion ? "inclusion" : "exclusion";
    c["category"] = r.category;
    c["facets"] = r.facets.ToJson();
    c["bound_box"] = r.facets.bound_box ? BoxToJson(*r.facets.bound_box) : Json(nullptr);
    if (r.relation) c["relation"] = RelationVerdictToJson(*r.relation);
    c["composed"] = r.composed;
    c["pass"] = r.pass;
    out["per_constraint"].push_back(std::move(c));
  }
  out["raw_total"] = report.raw_total;
  out["exclusion_penalty"] = report.exclusion_penalty;
  out["normalized_total"] = report.normalized_total;
  out["verdict"] = report.verdict;
  out["failures"] = report.Failures();
  out["config"] = report.config.ToJson();
  return out;
}

std::string RenderScoreReport(const ScoreReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return WriteJson(ToJson(report)) + "\n";
  std::ostringstream md;
  md << "# Score report\n\n";
  md << "Prompt: " << EscapeCell(report.constraints.prompt) << "\n\n";
  md << "Tag: " << ToString(report.constraints.tag) << " (decomposer: " << report.decomposer << ")\n\n";
  md << "| id | role | category | facets | relation | box | composed | pass |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.per_constraint) {
    std::string facets;
    for (const auto& [facet, value] : r.facets.Present()) {
      if (!facets.empty()) facets += ", ";
      facets += std::string(ToString(facet)) + "=" + FormatReal(value);
    }
    std::string relation = "-";
    if (r.relation) {
      relation = r.relation->relation.Name() + "(" + r.relation->relation.subject_id + ", " +
                 r.relation->relation.object_id + ") " + (r.relation->path == RelationPath::kCot ? "cot" : "geo") +
                 "=" + FormatReal(r.relation->score);
    }
    md << "| " << r.entity_id << " | " << (r.role == Role::kInclusion ? "inclusion" : "exclusion") << " | "
       << EscapeCell(r.category) << " | " << facets << " | " << EscapeCell(relation) << " | "
       << BoxCell(r.facets.bound_box) << " | " << FormatReal(r.composed) << " | " << (r.pass ? "yes" : "no")
       << " |\n";
  }
  md << "\n| raw_total | exclusion_penalty | normalized_total | verdict |\n";
  md << "|---|---|---|---|\n";
  md << "| " << FormatReal(report.raw_total) << " | " << FormatReal(report.exclusion_penalty) << " | "
     << FormatReal(report.normalized_total) << " | " << (report.verdict ? "pass" : "fail") << " |\n\n";
  md << "Config: `" << WriteJson(report.config.ToJson()) << "`\n";
  return md.str();
}

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "spatrwd/engine.hpp"

namespace spatrwd {

enum class ReportFormat { kJson, kMarkdown };
std::optional<ReportFormat> ParseReportFormat(std::string_view name);

Json RelationVerdictToJson(const RelationVerdict& verdict);
Json ToJson(const ScoreReport& report);

// JSON output is a single line with 9-decimal reals, newline terminated.
std::string RenderScoreReport(const ScoreReport& report, ReportFormat format);

}  // namespace spatrwd

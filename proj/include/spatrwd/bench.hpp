// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spatrwd/constraint.hpp"
#include "spatrwd/engine.hpp"
#include "spatrwd/protocol.hpp"

namespace spatrwd {

// One manifest line. Either `constraints` or `prompt` is set. An item with a
// scene is scored against an in-process fixture for that scene; otherwise
// the harness backend sees `image`.
struct BenchItem {
  std::string item_id;
  Tag dimension = Tag::kSingleObject;
  std::optional<ConstraintSet> constraints;
  std::optional<std::string> prompt;
  ImageRef image;
  std::optional<SceneGraph> scene;
  std::optional<bool> expected;  // planted verdict, when known
};

// Accepts "scene" as an inline SceneGraph or a path string (resolved against
// `base_dir`). The dimension must equal the constraint set's tag.
BenchItem ParseBenchItem(const Json& doc, std::string_view path, const std::string& base_dir = "");
Json ToJson(const BenchItem& item);
std::vector<BenchItem> LoadManifest(const std::string& file);

struct BenchRecord {
  std::string item_id;
  Tag dimension = Tag::kSingleObject;
  bool error = false;
  std::string error_message;  // "Kind: detail", set when error
  bool verdict = false;
  double normalized_total = 0.0;
  std::vector<std::string> failures;
  int constraints = 1;  // judgments contributed in per-constraint mode
  int constraints_passed = 0;
  std::optional<bool> expected;
};

Json ToJson(const BenchRecord& record);
BenchRecord ParseBenchRecord(const Json& doc, std::string_view path = "record");

struct Accuracy {
  int correct = 0;
  int total = 0;
  double Value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

struct BenchOptions {
  EngineConfig engine;
  int jobs = 1;
  bool skip_errors = false;
  bool per_constraint = false;
  std::string resume_file;  // progress JSONL; empty disables
};

struct BenchReport {
  std::vector<BenchRecord> per_item;  // manifest order
  std::vector<std::pair<Tag, Accuracy>> per_dimension;  // five dimensions first, then others seen
  Accuracy overall;
  int errors = 0;
  int resumed = 0;  // records taken from the progress file
  std::optional<Accuracy> expected_agreement;
  BenchOptions options;
};

// Item backend for items without a scene; may be null when every item has one.
using BackendProvider = std::function<std::shared_ptr<PerceptionBackend>(const BenchItem&)>;

// Never throws; failures become error records. The record carries both the
// per-item verdict and the per-constraint counts.
BenchRecord EvaluateItem(const BenchItem& item, PerceptionBackend& backend, const EngineConfig& config);

// Runs items on `options.jobs` workers and merges by manifest position, so
// the report does not depend on scheduling. Raises kEmptyManifest on an empty
// manifest.
BenchReport RunBench(const std::vector<BenchItem>& manifest, const BackendProvider& shared_backend,
                     const BenchOptions& options);

Json ToJson(const BenchReport& report);
std::string RenderBenchJson(const BenchReport& report);
std::string RenderBenchMarkdown(const BenchReport& report);

// Column header for a tag in the Markdown table, e.g. "P-Text".
std::string_view ColumnName(Tag tag);

}  // namespace spatrwd

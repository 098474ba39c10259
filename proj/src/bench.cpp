// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/bench.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "spatrwd/backend.hpp"
#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

constexpr Tag kDimensions[] = {Tag::kTextPosition, Tag::kTextCount, Tag::kComplex, Tag::kOrientation, Tag::kDepth3d};

[[noreturn]] void Schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kSchemaViolation, where + ": " + what);
}

std::string At(std::string_view base, std::string_view key) {
  return base.empty() ? std::string(key) : std::string(base) + "." + std::string(key);
}

Tag RequireTag(const Json& v, const std::string& where) {
  if (!v.is_string()) Schema(where, "expected string");
  auto tag = ParseTag(v.get<std::string>());
  if (!tag) Schema(where, "unknown dimension \"" + v.get<std::string>() + "\"");
  return *tag;
}

Json AccuracyJson(const Accuracy& a) {
  return Json{{"correct", a.correct}, {"total", a.total}, {"accuracy", a.Value()}};
}

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string ReadFile(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return {};
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string_view ColumnName(Tag tag) {
  switch (tag) {
    case Tag::kTextPosition: return "P-Text";
    case Tag::kTextCount: return "C-Text";
    case Tag::kComplex: return "Cpx";
    case Tag::kOrientation: return "Ori";
    case Tag::kDepth3d: return "3DRel";
    case Tag::kSingleObject: return "Single";
    case Tag::kTwoObject: return "Two";
    case Tag::kCounting: return "Count";
    case Tag::kColor: return "Color";
    case Tag::kPosition: return "Position";
  }
  return "?";
}

BenchItem ParseBenchItem(const Json& doc, std::string_view path, const std::string& base_dir) {
  const std::string base(path);
  if (!doc.is_object()) Schema(base, "expected object");
  static const std::set<std::string> kKnown = {"schema_version", "item_id", "dimension", "constraints",
                                               "prompt",         "image",   "scene",     "expected"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKnown.contains(key)) Schema(At(base, key), "unknown field");
  }
  BenchItem item;
  if (!doc.contains("item_id") || !doc["item_id"].is_string() || doc["item_id"].get<std::string>().empty()) {
    Schema(At(base, "item_id"), "expected non-empty string");
  }
  item.item_id = doc["item_id"].get<std::string>();
  if (!doc.contains("dimension")) Schema(At(base, "dimension"), "missing required field");
  item.dimension = RequireTag(doc["dimension"], At(base, "dimension"));
  const bool has_constraints = doc.contains("constraints");
  const bool has_prompt = doc.contains("prompt");
  if (has_constraints == has_prompt) Schema(base, "exactly one of constraints or prompt is required");
  if (has_constraints) {
    item.constraints = ParseConstraintSet(doc["constraints"], At(base, "constraints"));
    if (item.constraints->tag != item.dimension) {
      Schema(At(base, "dimension"), "\"" + std::string(ToString(item.dimension)) + "\" does not match constraint tag \"" +
                                        std::string(ToString(item.constraints->tag)) + "\"");
    }
  } else {
    if (!doc["prompt"].is_string()) Schema(At(base, "prompt"), "expected string");
    item.prompt = doc["prompt"].get<std::string>();
  }
  if (doc.contains("image")) item.image = ImageRef::FromJson(doc["image"], At(base, "image"));
  if (doc.contains("scene")) {
    const Json& scene = doc["scene"];
    if (scene.is_string()) {
      std::filesystem::path p(scene.get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      item.scene = LoadSceneGraph(p.string());
    } else {
      item.scene = ParseSceneGraph(scene, At(base, "scene"));
    }
  }
  if (doc.contains("expected")) {
    if (!doc["expected"].is_boolean()) Schema(At(base, "expected"), "expected boolean");
    item.expected = doc["expected"].get<bool>();
  }
  return item;
}

Json ToJson(const BenchItem& item) {
  Json out;
  out["item_id"] = item.item_id;
  out["dimension"] = std::string(ToString(item.dimension));
  if (item.constraints) out["constraints"] = ToJson(*item.constraints);
  if (item.prompt) out["prompt"] = *item.prompt;
  if (item.image.kind != ImageRef::Kind::kNone) out["image"] = item.image.ToJson();
  if (item.scene) out["scene"] = ToJson(*item.scene);
  if (item.expected) out["expected"] = *item.expected;
  return out;
}

std::vector<BenchItem> LoadManifest(const std::string& file) {
  std::ifstream probe(file);
  if (!probe) throw Error(ErrorKind::kInvalidArgument, "cannot open manifest " + file);
  const std::string base_dir = std::filesystem::path(file).parent_path().string();
  std::vector<BenchItem> items;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : ReadLines(file)) {
    ++line_no;
    const std::string where = file + ":" + std::to_string(line_no);
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      Schema(where, std::string("invalid JSON: ") + e.what());
    }
    BenchItem item = ParseBenchItem(doc, where, base_dir);
    if (!seen.insert(item.item_id).second) Schema(where + ".item_id", "duplicate item_id \"" + item.item_id + "\"");
    items.push_back(std::move(item));
  }
  if (items.empty()) throw Error(ErrorKind::kEmptyManifest, "manifest " + file + " has no items");
  return items;
}

Json ToJson(const BenchRecord& r) {
  Json out;
  out["item_id"] = r.item_id;
  out["dimension"] = std::string(ToString(r.dimension));
  out["status"] = r.error ? "error" : "ok";
  out["verdict"] = r.verdict;
  out["normalized_total"] = r.normalized_total;
  out["failures"] = r.failures;
  out["constraints"] = r.constraints;
  out["constraints_passed"] = r.constraints_passed;
  if (r.expected) out["expected"] = *r.expected;
  if (r.error) out["error"] = r.error_message;
  return out;
}

BenchRecord ParseBenchRecord(const Json& doc, std::string_view path) {
  const std::string base(path);
  if (!doc.is_object()) Schema(base, "expected object");
  BenchRecord r;
  auto need = [&](const char* key) -> const Json& {
    if (!doc.contains(key)) Schema(At(base, key), "missing required field");
    return doc[key];
  };
  const Json& id = need("item_id");
  if (!id.is_string()) Schema(At(base, "item_id"), "expected string");
  r.item_id = id.get<std::string>();
  r.dimension = RequireTag(need("dimension"), At(base, "dimension"));
  const Json& status = need("status");
  if (status != "ok" && status != "error") Schema(At(base, "status"), "expected ok or error");
  r.error = status == "error";
  if (!need("verdict").is_boolean()) Schema(At(base, "verdict"), "expected boolean");
  r.verdict = doc["verdict"].get<bool>();
  if (!need("normalized_total").is_number()) Schema(At(base, "normalized_total"), "expected number");
  r.normalized_total = doc["normalized_total"].get<double>();
  const Json& failures = need("failures");
  if (!failures.is_array()) Schema(At(base, "failures"), "expected array");
  for (const auto& f : failures) {
    if (!f.is_string()) Schema(At(base, "failures"), "expected strings");
    r.failures.push_back(f.get<std::string>());
  }
  if (!need("constraints").is_number_integer()) Schema(At(base, "constraints"), "expected integer");
  r.constraints = doc["constraints"].get<int>();
  if (!need("constraints_passed").is_number_integer()) Schema(At(base, "constraints_passed"), "expected integer");
  r.constraints_passed = doc["constraints_passed"].get<int>();
  if (doc.contains("expected")) {
    if (!doc["expected"].is_boolean()) Schema(At(base, "expected"), "expected boolean");
    r.expected = doc["expected"].get<bool>();
  }
  if (r.error) {
    if (!need("error").is_string()) Schema(At(base, "error"), "expected string");
    r.error_message = doc["error"].get<std::string>();
  }
  return r;
}

BenchRecord EvaluateItem(const BenchItem& item, PerceptionBackend& backend, const EngineConfig& config) {
  BenchRecord r;
  r.item_id = item.item_id;
  r.dimension = item.dimension;
  r.expected = item.expected;
  if (item.constraints) {
    r.constraints = static_cast<int>(item.constraints->inclusions.size() + item.constraints->exclusions.size());
  }
  try {
    ScoreReport report = item.constraints ? ScoreImage(*item.constraints, item.image, backend, config)
                                          : ScoreImage(*item.prompt, item.image, backend, config);
    if (report.constraints.tag != item.dimension) {
      throw Error(ErrorKind::kSchemaViolation, "dimension \"" + std::string(ToString(item.dimension)) +
                                                   "\" does not match decomposed tag \"" +
                                                   std::string(ToString(report.constraints.tag)) + "\"");
    }
    r.verdict = report.verdict;
    r.normalized_total = report.normalized_total;
    r.failures = report.Failures();
    r.constraints = static_cast<int>(report.per_constraint.size());
    r.constraints_passed = r.constraints - static_cast<int>(r.failures.size());
  } catch (const std::exception& e) {
    r.error = true;
    r.error_message = e.what();
    r.verdict = false;
    r.normalized_total = 0.0;
    r.failures.clear();
    r.constraints_passed = 0;
  }
  return r;
}

BenchReport RunBench(const std::vector<BenchItem>& manifest, const BackendProvider& shared_backend,
                     const BenchOptions& options) {
  if (manifest.empty()) throw Error(ErrorKind::kEmptyManifest, "manifest has no items");
  if (options.jobs < 1) throw Error(ErrorKind::kInvalidArgument, "jobs must be at least 1");
  BenchReport report;
  report.options = options;
  report.per_item.resize(manifest.size());
  std::vector<bool> done(manifest.size(), false);

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < manifest.size(); ++i) position[manifest[i].item_id] = i;

  std::ofstream progress;
  std::mutex progress_mutex;
  if (!options.resume_file.empty()) {
    const std::string existing = ReadFile(options.resume_file);
    std::istringstream lines(existing);
    std::string line;
    // A line cut short by an interrupted run fails to parse and is rerun.
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      try {
        BenchRecord r = ParseBenchRecord(Json::parse(line));
        auto it = position.find(r.item_id);
        if (it == position.end() || r.dimension != manifest[it->second].dimension) continue;
        r.expected = manifest[it->second].expected;
        report.per_item[it->second] = std::move(r);
        if (!done[it->second]) ++report.resumed;
        done[it->second] = true;
      } catch (const std::exception&) {
        continue;
      }
    }
    progress.open(options.resume_file, std::ios::app | std::ios::binary);
    if (!progress) throw Error(ErrorKind::kInvalidArgument, "cannot write progress file " + options.resume_file);
    if (!existing.empty() && existing.back() != '\n') progress << '\n';
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!done[i]) pending.push_back(i);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const std::size_t i = pending[k];
      const BenchItem& item = manifest[i];
      BenchRecord r;
      try {
        std::shared_ptr<PerceptionBackend> backend;
        if (item.scene) backend = FixtureBackend(*item.scene, options.engine.relation);
        else if (shared_backend) backend = shared_backend(item);
        if (!backend) throw Error(ErrorKind::kBackendUnavailable, "item has no scene and no backend is configured");
        r = EvaluateItem(item, *backend, options.engine);
      } catch (const std::exception& e) {
        r.item_id = item.item_id;
        r.dimension = item.dimension;
        r.expected = item.expected;
        r.error = true;
        r.error_message = e.what();
      }
      if (progress.is_open()) {
        std::lock_guard lock(progress_mutex);
        progress << WriteJson(ToJson(r)) << '\n';
        progress.flush();
      }
      report.per_item[i] = std::move(r);
    }
  };
  const int workers = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(1, pending.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::map<Tag, Accuracy> by_tag;
  Accuracy agreement;
  bool any_expected = false;
  for (const auto& r : report.per_item) {
    if (r.error) ++report.errors;
    if (r.expected) {
      any_expected = true;
      ++agreement.total;
      if (!r.error && r.verdict == *r.expected) ++agreement.correct;
    }
    if (r.error && options.skip_errors) continue;
    Accuracy& a = by_tag[r.dimension];
    if (options.per_constraint) {
      a.total += r.constraints;
      a.correct += r.error ? 0 : r.constraints_passed;
    } else {
      a.total += 1;
      a.correct += (!r.error && r.verdict) ? 1 : 0;
    }
  }
  for (Tag t : kDimensions) {
    if (by_tag.contains(t)) report.per_dimension.emplace_back(t, by_tag[t]);
  }
  for (Tag t : kAllTags) {
    if (std::find(std::begin(kDimensions), std::end(kDimensions), t) != std::end(kDimensions)) continue;
    if (by_tag.contains(t)) report.per_dimension.emplace_back(t, by_tag[t]);
  }
  for (const auto& [tag, a] : report.per_dimension) {
    report.overall.correct += a.correct;
    report.overall.total += a.total;
  }
  if (any_expected) report.expected_agreement = agreement;
  return report;
}

Json ToJson(const BenchReport& report) {
  Json out;
  out["schema_version"] = 1;
  out["mode"] = report.options.per_constraint ? "per_constraint" : "per_item";
  out["skip_errors"] = report.options.skip_errors;
  out["items"] = report.per_item.size();
  out["errors"] = report.errors;
  Json dims = Json::object();
  for (const auto& [tag, a] : report.per_dimension) dims[std::string(ToString(tag))] = AccuracyJson(a);
  out["per_dimension"] = dims;
  out["overall"] = AccuracyJson(report.overall);
  if (report.expected_agreement) out["expected_agreement"] = AccuracyJson(*report.expected_agreement);
  out["per_item"] = Json::array();
  for (const auto& r : report.per_item) out["per_item"].push_back(ToJson(r));
  out["config"] = report.options.engine.ToJson();
  return out;
}

std::string RenderBenchJson(const BenchReport& report) { return WriteJson(ToJson(report)) + "\n"; }

std::string RenderBenchMarkdown(const BenchReport& report) {
  std::map<Tag, Accuracy> by_tag(report.per_dimension.begin(), report.per_dimension.end());
  auto cell = [&](Tag t) { return by_tag.contains(t) ? Fixed4(by_tag[t].Value()) : std::string("-"); };
  std::ostringstream md;
  md << "# Bench report\n\n";
  md << "| P-Text | C-Text | Cpx | Ori | 3DRel | Overall |\n";
  md << "|---|---|---|---|---|---|\n";
  md << "|";
  for (Tag t : kDimensions) md << " " << cell(t) << " |";
  md << " " << Fixed4(report.overall.Value()) << " |\n";
  std::vector<Tag> others;
  for (const auto& [tag, a] : report.per_dimension) {
    if (std::find(std::begin(kDimensions), std::end(kDimensions), tag) == std::end(kDimensions)) {
      others.push_back(tag);
    }
  }
  if (!others.empty()) {
    md << "\n|";
    for (Tag t : others) md << " " << ColumnName(t) << " |";
    md << "\n|";
    for (std::size_t i = 0; i < others.size(); ++i) md << "---|";
    md << "\n|";
    for (Tag t : others) md << " " << cell(t) << " |";
    md << "\n";
  }
  md << "\nItems: " << report.per_item.size() << ", judgments: " << report.overall.total
     << ", correct: " << report.overall.correct << ", errors: " << report.errors
     << (report.options.skip_errors ? " (skipped)" : " (counted as incorrect)")
     << ", mode: " << (report.options.per_constraint ? "per-constraint" : "per-item") << "\n";
  if (report.expected_agreement) {
    md << "Agreement with expected verdicts: " << report.expected_agreement->correct << "/"
       << report.expected_agreement->total << "\n";
  }
  bool header = false;
  for (const auto& r : report.per_item) {
    if (!r.error && r.verdict) continue;
    if (!header) {
      md << "\n| item | dimension | normalized | failures |\n|---|---|---|---|\n";
      header = true;
    }
    std::string why;
    if (r.error) {
      why = "error: " + r.error_message;
    } else {
      for (const auto& f : r.failures) why += (why.empty() ? "" : ", ") + f;
    }
    for (auto& c : why) {
      if (c == '|' || c == '\n') c = ' ';
    }
    md << "| " << r.item_id << " | " << ToString(r.dimension) << " | " << FormatReal(r.normalized_total) << " | "
       << why << " |\n";
  }
  return md.str();
}

}  // namespace spatrwd

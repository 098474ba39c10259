// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

[[noreturn]] void Schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kSchemaViolation, where + ": " + what);
}

double Number(const Json& v, const std::string& where) {
  if (!v.is_number()) Schema(where, "expected number");
  return v.get<double>();
}

bool Boolean(const Json& v, const std::string& where) {
  if (!v.is_boolean()) Schema(where, "expected boolean");
  return v.get<bool>();
}

int Integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) Schema(where, "expected integer");
  return v.get<int>();
}

RelationPath Path(const std::string& name, const std::string& where) {
  auto path = ParseRelationPath(name);
  if (!path) throw Error(ErrorKind::kInvalidArgument, where + ": expected geo or cot, got \"" + name + "\"");
  return *path;
}

double ParseDouble(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw Error(ErrorKind::kInvalidArgument, where + ": expected a number, got \"" + text + "\"");
  }
  return v;
}

int ParseInt(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || v < -1000000 || v > 1000000) {
    throw Error(ErrorKind::kInvalidArgument, where + ": expected an integer, got \"" + text + "\"");
  }
  return static_cast<int>(v);
}

bool ParseBool(const std::string& text, const std::string& where) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no" || text.empty()) return false;
  throw Error(ErrorKind::kInvalidArgument, where + ": expected true or false, got \"" + text + "\"");
}

void Unit(double v, const std::string& name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::kInvalidArgument, name + " must lie in [0, 1]");
}

}  // namespace

Json Settings::ToJson() const {
  Json out = engine.ToJson();
  out["backend"] = backend;
  out["jobs"] = jobs;
  out["skip_errors"] = skip_errors;
  out["per_constraint"] = per_constraint;
  out["max_concurrent_requests"] = max_concurrent_requests;
  return out;
}

std::optional<std::string> GetEnv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

void ApplyConfigJson(Settings& settings, const Json& doc, std::string_view path) {
  const std::string base(path);
  if (!doc.is_object()) Schema(base, "expected object");
  EngineConfig& e = settings.engine;
  for (const auto& [key, value] : doc.items()) {
    const std::string where = base + "." + key;
    if (key == "schema_version") {
      if (value != 1) Schema(where, "must be 1");
    } else if (key == "tau_det") {
      e.detection_threshold = Number(value, where);
    } else if (key == "tau_pass") {
      e.pass_threshold = Number(value, where);
    } else if (key == "relations") {
      if (!value.is_string()) Schema(where, "expected string");
      e.relation_path = Path(value.get<std::string>(), where);
    } else if (key == "orientation_tolerance") {
      if (!value.is_object()) Schema(where, "expected object");
      for (const auto& [mode, tol] : value.items()) {
        if (mode == "cat8") e.orientation_tolerance_cat8 = Number(tol, where + ".cat8");
        else if (mode == "cont") e.orientation_tolerance_cont = Number(tol, where + ".cont");
        else Schema(where + "." + mode, "unknown field");
      }
    } else if (key == "relation_rules") {
      if (!value.is_object()) Schema(where, "expected object");
      RelationConfig& r = e.relation;
      for (const auto& [rule, v] : value.items()) {
        const std::string at = where + "." + rule;
        if (rule == "position_margin") r.position_margin = Number(v, at);
        else if (rule == "on_gap") r.on_gap = Number(v, at);
        else if (rule == "on_overlap") r.on_overlap = Number(v, at);
        else if (rule == "inside_ioa") r.inside_ioa = Number(v, at);
        else if (rule == "next_to_distance") r.next_to_distance = Number(v, at);
        else if (rule == "depth_epsilon") r.depth_epsilon = Number(v, at);
        else Schema(at, "unknown field");
      }
    } else if (key == "backend") {
      if (!value.is_string()) Schema(where, "expected string");
      settings.backend = value.get<std::string>();
    } else if (key == "jobs") {
      settings.jobs = Integer(value, where);
    } else if (key == "skip_errors") {
      settings.skip_errors = Boolean(value, where);
    } else if (key == "per_constraint") {
      settings.per_constraint = Boolean(value, where);
    } else if (key == "max_concurrent_requests") {
      settings.max_concurrent_requests = Integer(value, where);
    } else {
      Schema(where, "unknown field");
    }
  }
}

void ApplyEnvironment(Settings& settings, const EnvLookup& env) {
  if (auto v = env("SPATRWD_TAU_DET")) settings.engine.detection_threshold = ParseDouble(*v, "SPATRWD_TAU_DET");
  if (auto v = env("SPATRWD_TAU_PASS")) settings.engine.pass_threshold = ParseDouble(*v, "SPATRWD_TAU_PASS");
  if (auto v = env("SPATRWD_RELATIONS")) settings.engine.relation_path = Path(*v, "SPATRWD_RELATIONS");
  if (auto v = env("SPATRWD_BACKEND")) settings.backend = *v;
  if (auto v = env("SPATRWD_JOBS")) settings.jobs = ParseInt(*v, "SPATRWD_JOBS");
  if (auto v = env("SPATRWD_SKIP_ERRORS")) settings.skip_errors = ParseBool(*v, "SPATRWD_SKIP_ERRORS");
  if (auto v = env("SPATRWD_PER_CONSTRAINT")) settings.per_constraint = ParseBool(*v, "SPATRWD_PER_CONSTRAINT");
  if (auto v = env("SPATRWD_MAX_CONCURRENT_REQUESTS")) {
    settings.max_concurrent_requests = ParseInt(*v, "SPATRWD_MAX_CONCURRENT_REQUESTS");
  }
}

void ApplyOverrides(Settings& settings, const SettingOverrides& flags) {
  if (flags.tau_det) settings.engine.detection_threshold = *flags.tau_det;
  if (flags.tau_pass) settings.engine.pass_threshold = *flags.tau_pass;
  if (flags.relations) settings.engine.relation_path = *flags.relations;
  if (flags.backend) settings.backend = *flags.backend;
  if (flags.jobs) settings.jobs = *flags.jobs;
  if (flags.skip_errors) settings.skip_errors = *flags.skip_errors;
  if (flags.per_constraint) settings.per_constraint = *flags.per_constraint;
  if (flags.max_concurrent_requests) settings.max_concurrent_requests = *flags.max_concurrent_requests;
}

void ValidateSettings(const Settings& s) {
  const EngineConfig& e = s.engine;
  Unit(e.detection_threshold, "tau_det");
  Unit(e.pass_threshold, "tau_pass");
  for (double tol : {e.orientation_tolerance_cat8, e.orientation_tolerance_cont}) {
    if (!(tol > 0.0 && tol <= 180.0)) {
      throw Error(ErrorKind::kInvalidArgument, "orientation tolerances must lie in (0, 180]");
    }
  }
  const RelationConfig& r = e.relation;
  for (double v : {r.position_margin, r.on_gap, r.next_to_distance, r.depth_epsilon}) {
    if (!(v >= 0.0 && std::isfinite(v))) {
      throw Error(ErrorKind::kInvalidArgument, "relation margins must be finite and non-negative");
    }
  }
  Unit(r.on_overlap, "relation_rules.on_overlap");
  Unit(r.inside_ioa, "relation_rules.inside_ioa");
  if (s.jobs < 1 || s.jobs > 1024) throw Error(ErrorKind::kInvalidArgument, "jobs must lie in [1, 1024]");
  if (s.max_concurrent_requests < 1) {
    throw Error(ErrorKind::kInvalidArgument, "max_concurrent_requests must be at least 1");
  }
}

Settings ResolveSettings(const std::string& config_file, const SettingOverrides& flags, const EnvLookup& env) {
  Settings settings;
  std::string file = config_file;
  if (file.empty()) file = env("SPATRWD_CONFIG").value_or("");
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open config file " + file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json doc;
    try {
      doc = Json::parse(buffer.str());
    } catch (const Json::parse_error& e) {
      throw Error(ErrorKind::kSchemaViolation, file + ": " + e.what());
    }
    ApplyConfigJson(settings, doc, file);
  }
  ApplyEnvironment(settings, env);
  ApplyOverrides(settings, flags);
  ValidateSettings(settings);
  return settings;
}

}  // namespace spatrwd

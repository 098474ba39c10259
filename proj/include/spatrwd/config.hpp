// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "spatrwd/engine.hpp"

namespace spatrwd {

// Fields accepted in a config file, mirroring EngineConfig::ToJson plus the
// harness knobs. Every field is optional.
struct Settings {
  EngineConfig engine;
  std::string backend;  // fixture:SCENE | cmd:EXEC | http:URL
  int jobs = 1;
  bool skip_errors = false;
  bool per_constraint = false;
  int max_concurrent_requests = 8;

  Json ToJson() const;
};

// Values given on the command line; unset fields fall through.
struct SettingOverrides {
  std::optional<double> tau_det;
  std::optional<double> tau_pass;
  std::optional<RelationPath> relations;
  std::optional<std::string> backend;
  std::optional<int> jobs;
  std::optional<bool> skip_errors;
  std::optional<bool> per_constraint;
  std::optional<int> max_concurrent_requests;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

// Process environment.
std::optional<std::string> GetEnv(const std::string& name);

// Merges `doc` into `settings`; unknown fields raise kSchemaViolation.
void ApplyConfigJson(Settings& settings, const Json& doc, std::string_view path = "config");

// Reads SPATRWD_TAU_DET, SPATRWD_TAU_PASS, SPATRWD_RELATIONS, SPATRWD_BACKEND,
// SPATRWD_JOBS, SPATRWD_SKIP_ERRORS, SPATRWD_PER_CONSTRAINT and
// SPATRWD_MAX_CONCURRENT_REQUESTS.
void ApplyEnvironment(Settings& settings, const EnvLookup& env);

void ApplyOverrides(Settings& settings, const SettingOverrides& flags);

// Range checks every field; raises kInvalidArgument.
void ValidateSettings(const Settings& settings);

// Precedence: flags, then SPATRWD_* variables, then the config file (if any),
// then built-in defaults. SPATRWD_CONFIG names the file when `config_file` is
// empty.
Settings ResolveSettings(const std::string& config_file, const SettingOverrides& flags,
                         const EnvLookup& env = GetEnv);

}  // namespace spatrwd

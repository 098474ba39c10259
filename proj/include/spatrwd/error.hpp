// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatrwd {

enum class ErrorKind {
  kUnrecognizedTemplate,
  kSchemaViolation,
  kDanglingRelationId,
  kBackendUnavailable,
  kMalformedResponse,
  kUnparseableScore,
  kNotImplemented,
  kMissingDepth,
  kUnsupportedRelation,
  kInvalidArgument,
  kInfeasiblePlant,
  kEmptyManifest,
};

std::string_view ToString(ErrorKind kind);

// Single exception type for the library. `stage` is filled in by the scoring
// pipeline so callers can tell which step failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string stage = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  // Returns a copy attributed to `stage` unless one is already set.
  Error WithStage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::string detail_;
  std::string stage_;
};

}  // namespace spatrwd

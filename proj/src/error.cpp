// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/error.hpp"

namespace spatrwd {
namespace {

std::string Compose(ErrorKind kind, const std::string& message,
                    const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += ToString(kind);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnrecognizedTemplate: return "UnrecognizedTemplate";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
    case ErrorKind::kDanglingRelationId: return "DanglingRelationId";
    case ErrorKind::kBackendUnavailable: return "BackendUnavailable";
    case ErrorKind::kMalformedResponse: return "MalformedResponse";
    case ErrorKind::kUnparseableScore: return "UnparseableScore";
    case ErrorKind::kNotImplemented: return "NotImplemented";
    case ErrorKind::kMissingDepth: return "MissingDepth";
    case ErrorKind::kUnsupportedRelation: return "UnsupportedRelation";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kInfeasiblePlant: return "InfeasiblePlant";
    case ErrorKind::kEmptyManifest: return "EmptyManifest";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string message, std::string stage)
    : std::runtime_error(Compose(kind, message, stage)),
      kind_(kind),
      detail_(std::move(message)),
      stage_(std::move(stage)) {}

Error Error::WithStage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(kind_, detail_, std::move(stage));
}

}  // namespace spatrwd

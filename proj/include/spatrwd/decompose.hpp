// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "spatrwd/constraint.hpp"

namespace spatrwd {

// Deterministic grammar over the templated prompt families documented in
// docs/templates.md. Entity ids are e1, e2, ... in order of first mention.
// Throws Error{kUnrecognizedTemplate} when no family matches.
ConstraintSet DecomposeTemplate(std::string_view prompt);

// Singular form used for category names ("cups" -> "cup").
std::string Singularize(std::string_view noun);

}  // namespace spatrwd

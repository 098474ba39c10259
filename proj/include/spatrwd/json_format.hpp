// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "json.hpp"

namespace spatrwd {

// Insertion-ordered JSON keeps every emitted document in a stable field order.
using Json = nlohmann::ordered_json;

// Fixed 9-decimal rendering used for every real in reports and payloads.
// Negative zero and values that round to zero print as 0.000000000.
std::string FormatReal(double value);

// Serializes `doc` with reals rendered by FormatReal. indent < 0 gives a
// single line; otherwise pretty-printed with `indent` spaces.
std::string WriteJson(const Json& doc, int indent = -1);

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace spatrwd::text {

// All helpers take and return UTF-8. Malformed sequences become U+FFFD.
std::string Nfc(std::string_view s);
std::string CaseFold(std::string_view s);
std::string Lower(std::string_view s);

// Trims and collapses every run of Unicode whitespace to one ASCII space.
std::string CollapseWhitespace(std::string_view s);

// Removes leading and trailing punctuation code points.
std::string StripEdgePunctuation(std::string_view s);

// NFC, case fold, whitespace collapse, edge punctuation strip.
std::string MatchKey(std::string_view s);

std::u32string CodePoints(std::string_view s);

}  // namespace spatrwd::text

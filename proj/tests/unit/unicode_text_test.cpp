// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "spatrwd/unicode_text.hpp"

using namespace spatrwd;

TEST_CASE("nfc composes combining sequences") {
  CHECK(text::Nfc("Cafe\xCC\x81") == "Caf\xC3\xA9");
  CHECK(text::Nfc("plain") == "plain");
}

TEST_CASE("match key folds case, width of whitespace and edge punctuation") {
  CHECK(text::MatchKey("  STOP! ") == "stop");
  CHECK(text::MatchKey("Stra\xC3\x9F" "e") == text::MatchKey("STRASSE"));
  CHECK(text::MatchKey("Caf\xC3\xA9") == text::MatchKey("CAFE\xCC\x81"));
  CHECK(text::MatchKey("Fresh \t Bread") == "fresh bread");
  CHECK(text::MatchKey("\"Hello\"") == "hello");
}

TEST_CASE("collapse whitespace trims and joins runs") {
  CHECK(text::CollapseWhitespace("  a \n  b  ") == "a b");
  CHECK(text::CollapseWhitespace("") == "");
}

TEST_CASE("code points decode utf-8") {
  CHECK(text::CodePoints("a\xC3\xA9").size() == 2);
  CHECK(text::CodePoints("\xF0\x9F\x98\x80").size() == 1);
}

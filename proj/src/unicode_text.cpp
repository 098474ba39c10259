// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/unicode_text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "spatrwd/error.hpp"

namespace spatrwd::text {
namespace {

icu::UnicodeString FromUtf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string ToUtf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

const icu::Normalizer2& NfcInstance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "ICU NFC normalizer unavailable");
  }
  return *nfc;
}

icu::UnicodeString NfcU(const icu::UnicodeString& u) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = NfcInstance().normalize(u, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kInvalidArgument, "NFC normalization failed");
  }
  return out;
}

}  // namespace

std::string Nfc(std::string_view s) { return ToUtf8(NfcU(FromUtf8(s))); }

std::string CaseFold(std::string_view s) {
  icu::UnicodeString u = FromUtf8(s);
  u.foldCase();
  return ToUtf8(u);
}

std::string Lower(std::string_view s) {
  icu::UnicodeString u = FromUtf8(s);
  u.toLower(icu::Locale::getRoot());
  return ToUtf8(u);
}

std::string CollapseWhitespace(std::string_view s) {
  const icu::UnicodeString u = FromUtf8(s);
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    i = u.moveIndex32(i, 1);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  return ToUtf8(out);
}

std::string StripEdgePunctuation(std::string_view s) {
  const std::u32string cps = CodePoints(s);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && u_ispunct(static_cast<UChar32>(cps[begin]))) ++begin;
  while (end > begin && u_ispunct(static_cast<UChar32>(cps[end - 1]))) --end;
  icu::UnicodeString out;
  for (std::size_t i = begin; i < end; ++i) out.append(static_cast<UChar32>(cps[i]));
  return ToUtf8(out);
}

std::string MatchKey(std::string_view s) {
  icu::UnicodeString u = NfcU(FromUtf8(s));
  u.foldCase();
  const std::string folded = ToUtf8(NfcU(u));
  // Stripping can expose whitespace that sat inside the punctuation.
  return CollapseWhitespace(StripEdgePunctuation(CollapseWhitespace(folded)));
}

std::u32string CodePoints(std::string_view s) {
  const icu::UnicodeString u = FromUtf8(s);
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length();) {
    out.push_back(static_cast<char32_t>(u.char32At(i)));
    i = u.moveIndex32(i, 1);
  }
  return out;
}

}  // namespace spatrwd::text

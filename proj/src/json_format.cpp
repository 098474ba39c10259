// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/json_format.hpp"

#include <cmath>
#include <cstdio>

namespace spatrwd {
namespace {

void Emit(const Json& node, int indent, int depth, std::string& out) {
  auto newline = [&](int level) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (node.type()) {
    case Json::value_t::object: {
      if (node.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : node.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += indent < 0 ? ":" : ": ";
        Emit(value, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (node.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : node) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        Emit(value, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += FormatReal(node.get<double>());
      return;
    default:
      out += node.dump();
      return;
  }
}

}  // namespace

std::string FormatReal(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", value);
  std::string text(buf);
  if (text.find_first_not_of("-0.") == std::string::npos) return "0.000000000";
  return text;
}

std::string WriteJson(const Json& doc, int indent) {
  std::string out;
  Emit(doc, indent, 0, out);
  return out;
}

}  // namespace spatrwd

// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "spatrwd/json_format.hpp"

namespace spatrwd {

// Axis-aligned box in normalized image coordinates: origin top-left, y grows
// downward, every coordinate in [0, 1].
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double cx() const { return (x0 + x1) / 2.0; }
  double cy() const { return (y0 + y1) / 2.0; }
  double diagonal() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

// x0 < x1, y0 < y1 and every coordinate inside [0, 1].
bool IsValid(const BBox& box);

// Throws Error{kInvalidArgument} naming `path` when the box is invalid.
void RequireValid(const BBox& box, std::string_view path);

double IntersectionArea(const BBox& a, const BBox& b);

// Area(text ∩ obj) / Area(text): how much of `text_box` lies inside `obj_box`.
double Ioa(const BBox& text_box, const BBox& obj_box);

double CenterDistance(const BBox& a, const BBox& b);

// Scales every coordinate by `factor` about the origin.
BBox Scaled(const BBox& box, double factor);

// Boxes travel as [x0, y0, x1, y1].
Json BoxToJson(const BBox& box);
// Reals rendered with 9 decimals are used inside CoT payloads.
BBox BoxFromJson(const Json& value, std::string_view path);

std::string ToString(const BBox& box);

}  // namespace spatrwd

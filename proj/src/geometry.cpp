// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "spatrwd/error.hpp"

namespace spatrwd {

double BBox::diagonal() const { return std::hypot(width(), height()); }

bool IsValid(const BBox& box) {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  return in_unit(box.x0) && in_unit(box.y0) && in_unit(box.x1) &&
         in_unit(box.y1) && box.x0 < box.x1 && box.y0 < box.y1;
}

void RequireValid(const BBox& box, std::string_view path) {
  if (!IsValid(box)) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(path) + ": invalid box " + ToString(box));
  }
}

double IntersectionArea(const BBox& a, const BBox& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double Ioa(const BBox& text_box, const BBox& obj_box) {
  const double area = text_box.area();
  if (area <= 0.0) return 0.0;
  return std::clamp(IntersectionArea(text_box, obj_box) / area, 0.0, 1.0);
}

double CenterDistance(const BBox& a, const BBox& b) {
  return std::hypot(b.cx() - a.cx(), b.cy() - a.cy());
}

BBox Scaled(const BBox& box, double factor) {
  return {box.x0 * factor, box.y0 * factor, box.x1 * factor, box.y1 * factor};
}

Json BoxToJson(const BBox& box) {
  return Json::array({box.x0, box.y0, box.x1, box.y1});
}

BBox BoxFromJson(const Json& value, std::string_view path) {
  if (!value.is_array() || value.size() != 4) {
    throw Error(ErrorKind::kSchemaViolation,
                std::string(path) + ": expected [x0, y0, x1, y1]");
  }
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!value[i].is_number()) {
      throw Error(ErrorKind::kSchemaViolation,
                  std::string(path) + "[" + std::to_string(i) + "]: expected number");
    }
    c[i] = value[i].get<double>();
  }
  BBox box{c[0], c[1], c[2], c[3]};
  if (!IsValid(box)) {
    throw Error(ErrorKind::kSchemaViolation,
                std::string(path) + ": invalid box " + ToString(box));
  }
  return box;
}

std::string ToString(const BBox& box) {
  return "[" + FormatReal(box.x0) + ", " + FormatReal(box.y0) + ", " +
         FormatReal(box.x1) + ", " + FormatReal(box.y1) + "]";
}

}  // namespace spatrwd

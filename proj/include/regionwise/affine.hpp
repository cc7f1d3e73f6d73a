#pragma once

#include <array>
#include <filesystem>

#include "regionwise/mat4.hpp"

namespace regionwise {

// World-mm -> world-mm affine mapping. The bottom row is fixed at
// (0,0,0,1) and the linear block must be invertible (|det| > 1e-9); both
// are checked at construction.
struct AffineTransform {
  Mat4 matrix;

  AffineTransform() = default;
  explicit AffineTransform(const Mat4& m);

  static AffineTransform identity() { return AffineTransform{}; }
  static AffineTransform translation(double tx, double ty, double tz);
  static AffineTransform scaling(double sx, double sy, double sz);
};

std::array<double, 3> apply_affine_point(const AffineTransform& t, const std::array<double, 3>& p);

// Result maps p to a(b(p)).
AffineTransform compose(const AffineTransform& a, const AffineTransform& b);

AffineTransform invert(const AffineTransform& t);

// Plain-text interchange format: 4 lines of 4 decimal numbers, row-major.
void write_affine_text(const AffineTransform& t, const std::filesystem::path& path);
AffineTransform read_affine_text(const std::filesystem::path& path);

}  // namespace regionwise

#pragma once

#include <array>
#include <cmath>

#include "regionwise/errors.hpp"

namespace regionwise {

// Row-major 4x4 homogeneous matrix. Every matrix in this codebase is affine:
// the bottom row is (0,0,0,1) and application ignores the projective part.
struct Mat4 {
  std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  static Mat4 identity() { return Mat4{}; }

  double at(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }
  double& at(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }

  Mat4 operator*(const Mat4& o) const {
    Mat4 out;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += at(r, k) * o.at(k, c);
        out.at(r, c) = s;
      }
    }
    return out;
  }

  std::array<double, 3> apply_point(const std::array<double, 3>& p) const {
    std::array<double, 3> out;
    for (int r = 0; r < 3; ++r) {
      out[static_cast<std::size_t>(r)] =
          at(r, 0) * p[0] + at(r, 1) * p[1] + at(r, 2) * p[2] + at(r, 3);
    }
    return out;
  }

  double det3() const {
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  }

  bool bottom_row_is_affine() const {
    return at(3, 0) == 0.0 && at(3, 1) == 0.0 && at(3, 2) == 0.0 && at(3, 3) == 1.0;
  }

  // Inverse of [A t; 0 1] as [inv(A) -inv(A)t; 0 1], bottom row exact.
  Mat4 inverse_affine() const {
    const double det = det3();
    if (std::abs(det) <= 1e-9) {
      throw SingularityError("matrix is singular (|det| <= 1e-9)");
    }
    Mat4 inv;
    const double id = 1.0 / det;
    inv.at(0, 0) = (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) * id;
    inv.at(0, 1) = (at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2)) * id;
    inv.at(0, 2) = (at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1)) * id;
    inv.at(1, 0) = (at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2)) * id;
    inv.at(1, 1) = (at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0)) * id;
    inv.at(1, 2) = (at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2)) * id;
    inv.at(2, 0) = (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)) * id;
    inv.at(2, 1) = (at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1)) * id;
    inv.at(2, 2) = (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) * id;
    for (int r = 0; r < 3; ++r) {
      inv.at(r, 3) = -(inv.at(r, 0) * at(0, 3) + inv.at(r, 1) * at(1, 3) + inv.at(r, 2) * at(2, 3));
    }
    inv.at(3, 0) = 0.0;
    inv.at(3, 1) = 0.0;
    inv.at(3, 2) = 0.0;
    inv.at(3, 3) = 1.0;
    return inv;
  }

  bool operator==(const Mat4& o) const { return m == o.m; }
};

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    const double d = std::abs(a.m[i] - b.m[i]);
    if (d > worst) worst = d;
  }
  return worst;
}

}  // namespace regionwise

#include "regionwise/affine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace regionwise {

AffineTransform::AffineTransform(const Mat4& m) : matrix(m) {
  if (!matrix.bottom_row_is_affine()) {
    throw InputError("affine transform must have bottom row (0,0,0,1)");
  }
  if (std::abs(matrix.det3()) <= 1e-9) {
    throw SingularityError("affine transform is singular (|det| <= 1e-9)");
  }
}

AffineTransform AffineTransform::translation(double tx, double ty, double tz) {
  Mat4 m;
  m.at(0, 3) = tx;
  m.at(1, 3) = ty;
  m.at(2, 3) = tz;
  return AffineTransform(m);
}

AffineTransform AffineTransform::scaling(double sx, double sy, double sz) {
  Mat4 m;
  m.at(0, 0) = sx;
  m.at(1, 1) = sy;
  m.at(2, 2) = sz;
  return AffineTransform(m);
}

std::array<double, 3> apply_affine_point(const AffineTransform& t, const std::array<double, 3>& p) {
  return t.matrix.apply_point(p);
}

AffineTransform compose(const AffineTransform& a, const AffineTransform& b) {
  Mat4 m = a.matrix * b.matrix;
  m.at(3, 0) = 0.0;
  m.at(3, 1) = 0.0;
  m.at(3, 2) = 0.0;
  m.at(3, 3) = 1.0;
  return AffineTransform(m);
}

AffineTransform invert(const AffineTransform& t) {
  return AffineTransform(t.matrix.inverse_affine());
}

void write_affine_text(const AffineTransform& t, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  char buf[64];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.matrix.at(r, c));
      f << buf << (c == 3 ? "\n" : " ");
    }
  }
  if (!f.good()) throw IoError("write failure on " + path.string());
}

AffineTransform read_affine_text(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  Mat4 m;
  for (std::size_t i = 0; i < 16; ++i) {
    if (!(f >> m.m[i])) {
      throw InputError("expected 16 numbers in transform file " + path.string());
    }
  }
  return AffineTransform(m);
}

}  // namespace regionwise

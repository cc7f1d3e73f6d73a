#include "regionwise/resample.hpp"

#include <cmath>

namespace regionwise {

namespace {

// Composed rounding error can leave coordinates a few ulp off a grid
// point; snapping keeps identity resampling exact.
constexpr double kGridSnap = 1e-9;

inline double snap(double c) {
  const double r = std::round(c);
  return std::abs(c - r) <= kGridSnap ? r : c;
}

}  // namespace

Volume resample(const Volume& src, const AffineTransform& t, const VolumeGeometry& target,
                Interp mode) {
  src.validate();
  if (mode == Interp::linear && (src.intent == Intent::labels || src.intent == Intent::mask)) {
    throw ModeError("linear interpolation is not allowed for mask/label volumes");
  }

  // One matrix takes target voxel indices to continuous src voxel coords.
  const Mat4 to_src =
      src.affine.inverse_affine() * (t.matrix.inverse_affine() * target.affine);

  Volume out(target.dims, target.spacing, target.affine, src.intent);

  const int nx = target.dims[0];
  const int ny = target.dims[1];
  const int nz = target.dims[2];
  const int sx = src.dims[0];
  const int sy = src.dims[1];
  const int sz = src.dims[2];

  std::size_t row = 0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i, ++row) {
        const double fi = static_cast<double>(i);
        const double fj = static_cast<double>(j);
        const double fk = static_cast<double>(k);
        const double cx = snap(to_src.at(0, 0) * fi + to_src.at(0, 1) * fj + to_src.at(0, 2) * fk + to_src.at(0, 3));
        const double cy = snap(to_src.at(1, 0) * fi + to_src.at(1, 1) * fj + to_src.at(1, 2) * fk + to_src.at(1, 3));
        const double cz = snap(to_src.at(2, 0) * fi + to_src.at(2, 1) * fj + to_src.at(2, 2) * fk + to_src.at(2, 3));

        double value = 0.0;
        if (mode == Interp::nearest) {
          const int ni = static_cast<int>(std::floor(cx + 0.5));
          const int nj = static_cast<int>(std::floor(cy + 0.5));
          const int nk = static_cast<int>(std::floor(cz + 0.5));
          if (ni >= 0 && ni < sx && nj >= 0 && nj < sy && nk >= 0 && nk < sz) {
            value = src.at(ni, nj, nk);
          }
        } else {
          if (cx >= 0.0 && cx <= sx - 1 && cy >= 0.0 && cy <= sy - 1 && cz >= 0.0 &&
              cz <= sz - 1) {
            int i0 = static_cast<int>(std::floor(cx));
            int j0 = static_cast<int>(std::floor(cy));
            int k0 = static_cast<int>(std::floor(cz));
            if (i0 == sx - 1) --i0;
            if (j0 == sy - 1) --j0;
            if (k0 == sz - 1) --k0;
            if (sx == 1) i0 = 0;
            if (sy == 1) j0 = 0;
            if (sz == 1) k0 = 0;
            const double fx = cx - i0;
            const double fy = cy - j0;
            const double fz = cz - k0;
            const int i1 = sx == 1 ? i0 : i0 + 1;
            const int j1 = sy == 1 ? j0 : j0 + 1;
            const int k1 = sz == 1 ? k0 : k0 + 1;
            const double c000 = src.at(i0, j0, k0);
            const double c100 = src.at(i1, j0, k0);
            const double c010 = src.at(i0, j1, k0);
            const double c110 = src.at(i1, j1, k0);
            const double c001 = src.at(i0, j0, k1);
            const double c101 = src.at(i1, j0, k1);
            const double c011 = src.at(i0, j1, k1);
            const double c111 = src.at(i1, j1, k1);
            const double c00 = c000 * (1.0 - fx) + c100 * fx;
            const double c10 = c010 * (1.0 - fx) + c110 * fx;
            const double c01 = c001 * (1.0 - fx) + c101 * fx;
            const double c11 = c011 * (1.0 - fx) + c111 * fx;
            const double c0 = c00 * (1.0 - fy) + c10 * fy;
            const double c1 = c01 * (1.0 - fy) + c11 * fy;
            value = c0 * (1.0 - fz) + c1 * fz;
          }
        }
        out.data[row] = value;
      }
    }
  }
  return out;
}

LabelVolume propagate_atlas(const LabelVolume& atlas_labels, const AffineTransform& t,
                            const VolumeGeometry& subject_geometry) {
  Volume moved = resample(atlas_labels.vol, t, subject_geometry, Interp::nearest);
  return LabelVolume(std::move(moved), atlas_labels.num_regions);
}

}  // namespace regionwise

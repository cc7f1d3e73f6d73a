#include "regionwise/registration.hpp"

#include <algorithm>
#include <cmath>

namespace regionwise {

namespace {

constexpr int kNumParams = 12;
constexpr int kMaxHalvings = 20;

// theta[0..8]: row-major 3x3 linear block, theta[9..11]: translation (mm).
// Transform: p -> L*(p - c) + c + u, with c the fixed image world centre.
Mat4 params_to_matrix(const double* theta, const std::array<double, 3>& center) {
  Mat4 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.at(r, c) = theta[r * 3 + c];
  }
  for (int r = 0; r < 3; ++r) {
    double lc = 0.0;
    for (int c = 0; c < 3; ++c) lc += theta[r * 3 + c] * center[static_cast<std::size_t>(c)];
    m.at(r, 3) = center[static_cast<std::size_t>(r)] + theta[9 + r] - lc;
  }
  return m;
}

// Mean squared difference over the fixed grid between fixed and moving
// pulled through the transform. Out-of-field samples contribute 0 for the
// moving image. Fixed summation order.
double mse_cost(const Volume& moving, const Volume& fixed, const Mat4& transform) {
  const Mat4 to_src = moving.affine.inverse_affine() * (transform.inverse_affine() * fixed.affine);

  const int nx = fixed.dims[0];
  const int ny = fixed.dims[1];
  const int nz = fixed.dims[2];
  const int sx = moving.dims[0];
  const int sy = moving.dims[1];
  const int sz = moving.dims[2];

  double ss = 0.0;
  std::size_t row = 0;
  for (int k = 0; k < nz; ++k) {
    const double bx_k = to_src.at(0, 2) * k + to_src.at(0, 3);
    const double by_k = to_src.at(1, 2) * k + to_src.at(1, 3);
    const double bz_k = to_src.at(2, 2) * k + to_src.at(2, 3);
    for (int j = 0; j < ny; ++j) {
      double cx = to_src.at(0, 1) * j + bx_k;
      double cy = to_src.at(1, 1) * j + by_k;
      double cz = to_src.at(2, 1) * j + bz_k;
      for (int i = 0; i < nx; ++i, ++row) {
        double sample = 0.0;
        if (cx >= 0.0 && cx <= sx - 1 && cy >= 0.0 && cy <= sy - 1 && cz >= 0.0 &&
            cz <= sz - 1) {
          int i0 = static_cast<int>(cx);
          int j0 = static_cast<int>(cy);
          int k0 = static_cast<int>(cz);
          if (i0 >= sx - 1) i0 = sx - 2;
          if (j0 >= sy - 1) j0 = sy - 2;
          if (k0 >= sz - 1) k0 = sz - 2;
          const double fx = cx - i0;
          const double fy = cy - j0;
          const double fz = cz - k0;
          const std::size_t base = moving.index(i0, j0, k0);
          const std::size_t dy = static_cast<std::size_t>(sx);
          const std::size_t dz = static_cast<std::size_t>(sx) * static_cast<std::size_t>(sy);
          const double* d = moving.data.data() + base;
          const double c00 = d[0] * (1.0 - fx) + d[1] * fx;
          const double c10 = d[dy] * (1.0 - fx) + d[dy + 1] * fx;
          const double c01 = d[dz] * (1.0 - fx) + d[dz + 1] * fx;
          const double c11 = d[dz + dy] * (1.0 - fx) + d[dz + dy + 1] * fx;
          const double c0 = c00 * (1.0 - fy) + c10 * fy;
          const double c1 = c01 * (1.0 - fy) + c11 * fy;
          sample = c0 * (1.0 - fz) + c1 * fz;
        }
        const double diff = sample - fixed.data[row];
        ss += diff * diff;
        cx += to_src.at(0, 0);
        cy += to_src.at(1, 0);
        cz += to_src.at(2, 0);
      }
    }
  }
  const double cost = ss / static_cast<double>(fixed.voxel_count());
  if (!std::isfinite(cost)) throw NumericError("registration cost is not finite");
  return cost;
}

double intensity_variance(const Volume& v) {
  const std::size_t n = v.voxel_count();
  double mean = 0.0;
  for (double d : v.data) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : v.data) ss += (d - mean) * (d - mean);
  return ss / static_cast<double>(n);
}

}  // namespace

void RegistrationConfig::validate() const {
  if (dof != 12) throw InputError("only 12-dof affine registration is supported");
  if (pyramid_levels < 1) throw InputError("pyramid_levels must be >= 1");
  if (max_iters_per_level < 1) throw InputError("max_iters_per_level must be >= 1");
  if (!(step_init > 0.0)) throw InputError("step_init must be positive");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw InputError("step_shrink must be in (0,1)");
  if (!(converge_tol > 0.0 && converge_tol < 1.0)) throw InputError("converge_tol must be in (0,1)");
  if (!(fd_epsilon_translation > 0.0) || !(fd_epsilon_linear > 0.0)) {
    throw InputError("finite-difference epsilons must be positive");
  }
}

Volume downsample_by_two(const Volume& v) {
  std::array<int, 3> nd;
  for (std::size_t axis = 0; axis < 3; ++axis) nd[axis] = (v.dims[axis] + 1) / 2;

  // New voxel (i,j,k) covers old voxels [2i, 2i+1]; its centre sits at old
  // index 2i + 0.5, which fixes the new affine.
  Mat4 scale;
  scale.at(0, 0) = 2.0;
  scale.at(1, 1) = 2.0;
  scale.at(2, 2) = 2.0;
  scale.at(0, 3) = 0.5;
  scale.at(1, 3) = 0.5;
  scale.at(2, 3) = 0.5;
  Volume out(nd, {v.spacing[0] * 2.0, v.spacing[1] * 2.0, v.spacing[2] * 2.0}, v.affine * scale,
             v.intent);

  for (int k = 0; k < nd[2]; ++k) {
    for (int j = 0; j < nd[1]; ++j) {
      for (int i = 0; i < nd[0]; ++i) {
        double sum = 0.0;
        int count = 0;
        for (int dk = 0; dk < 2; ++dk) {
          const int zk = 2 * k + dk;
          if (zk >= v.dims[2]) continue;
          for (int dj = 0; dj < 2; ++dj) {
            const int yj = 2 * j + dj;
            if (yj >= v.dims[1]) continue;
            for (int di = 0; di < 2; ++di) {
              const int xi = 2 * i + di;
              if (xi >= v.dims[0]) continue;
              sum += v.at(xi, yj, zk);
              ++count;
            }
          }
        }
        out.at(i, j, k) = sum / count;
      }
    }
  }
  return out;
}

RegistrationResult register_affine(const Volume& moving, const Volume& fixed,
                                   const RegistrationConfig& cfg) {
  cfg.validate();
  if (moving.intent != Intent::intensity || fixed.intent != Intent::intensity) {
    throw RegistrationInputError("registration requires intensity volumes");
  }
  moving.validate();
  fixed.validate();
  const int min_axis = std::min({fixed.dims[0], fixed.dims[1], fixed.dims[2], moving.dims[0],
                                 moving.dims[1], moving.dims[2]});
  if (min_axis < 8) {
    throw RegistrationInputError("each axis must be >= 8 voxels for registration");
  }
  if (intensity_variance(fixed) == 0.0) {
    throw RegistrationInputError("fixed image has zero intensity variance");
  }

  // Clamp the pyramid so the coarsest level keeps >= 8 voxels per axis.
  int levels = 1;
  while (levels < cfg.pyramid_levels && (min_axis >> levels) >= 8) ++levels;

  std::vector<Volume> moving_pyr{moving};
  std::vector<Volume> fixed_pyr{fixed};
  for (int l = 1; l < levels; ++l) {
    moving_pyr.push_back(downsample_by_two(moving_pyr.back()));
    fixed_pyr.push_back(downsample_by_two(fixed_pyr.back()));
  }

  // Anchor at the full-resolution fixed image's world centre.
  const std::array<double, 3> center = fixed.affine.apply_point(
      {(fixed.dims[0] - 1) / 2.0, (fixed.dims[1] - 1) / 2.0, (fixed.dims[2] - 1) / 2.0});

  std::array<double, kNumParams> eps{};
  for (int i = 0; i < 9; ++i) eps[static_cast<std::size_t>(i)] = cfg.fd_epsilon_linear;
  for (int i = 9; i < 12; ++i) eps[static_cast<std::size_t>(i)] = cfg.fd_epsilon_translation;

  std::array<double, kNumParams> theta{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};

  RegistrationResult result;
  bool level_converged = false;

  for (int l = levels - 1; l >= 0; --l) {
    const Volume& mov = moving_pyr[static_cast<std::size_t>(l)];
    const Volume& fix = fixed_pyr[static_cast<std::size_t>(l)];

    auto cost_at = [&](const std::array<double, kNumParams>& p) {
      return mse_cost(mov, fix, params_to_matrix(p.data(), center));
    };

    double cost = cost_at(theta);
    std::vector<double> history{cost};
    double step = cfg.step_init;
    level_converged = false;

    for (int iter = 0; iter < cfg.max_iters_per_level; ++iter) {
      // Central-difference gradient, expressed in epsilon-scaled units so
      // translation and linear parameters move at comparable rates.
      std::array<double, kNumParams> grad_scaled{};
      double norm_sq = 0.0;
      for (int p = 0; p < kNumParams; ++p) {
        std::array<double, kNumParams> probe = theta;
        probe[static_cast<std::size_t>(p)] = theta[static_cast<std::size_t>(p)] + eps[static_cast<std::size_t>(p)];
        const double hi = cost_at(probe);
        probe[static_cast<std::size_t>(p)] = theta[static_cast<std::size_t>(p)] - eps[static_cast<std::size_t>(p)];
        const double lo = cost_at(probe);
        const double g = (hi - lo) / 2.0;  // d(cost)/d(theta_p / eps_p)
        grad_scaled[static_cast<std::size_t>(p)] = g;
        norm_sq += g * g;
      }
      const double norm = std::sqrt(norm_sq);
      if (norm == 0.0) {
        level_converged = true;
        break;
      }

      // Backtracking line search along the normalised scaled gradient.
      bool accepted = false;
      double new_cost = cost;
      for (int halving = 0; halving <= kMaxHalvings; ++halving) {
        std::array<double, kNumParams> trial = theta;
        for (int p = 0; p < kNumParams; ++p) {
          trial[static_cast<std::size_t>(p)] -=
              step * eps[static_cast<std::size_t>(p)] * grad_scaled[static_cast<std::size_t>(p)] / norm;
        }
        new_cost = cost_at(trial);
        if (new_cost < cost) {
          theta = trial;
          accepted = true;
          break;
        }
        step *= cfg.step_shrink;
      }
      if (!accepted) {
        level_converged = true;  // no descent direction at the smallest step
        break;
      }

      ++result.iterations_used;
      history.push_back(new_cost);
      const double rel_drop = (cost - new_cost) / std::max(cost, 1e-300);
      cost = new_cost;
      step *= 2.0;  // grow after success; backtracking reins it back in
      if (rel_drop < cfg.converge_tol) {
        level_converged = true;
        break;
      }
    }

    result.cost_history.push_back(std::move(history));
    result.final_cost = cost;
  }

  result.converged = level_converged;
  result.transform = AffineTransform(params_to_matrix(theta.data(), center));
  return result;
}

}  // namespace regionwise

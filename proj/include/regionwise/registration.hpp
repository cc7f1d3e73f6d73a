#pragma once

#include <vector>

#include "regionwise/affine.hpp"
#include "regionwise/volume.hpp"

namespace regionwise {

// Settings for intensity-based affine registration. The optimizer is
// finite-difference gradient descent with a backtracking line search, run
// coarse-to-fine over a mean-pooled pyramid. Twelve parameters (3x3 linear
// block plus translation) are anchored at the fixed image's world centre.
struct RegistrationConfig {
  int dof = 12;                       // full affine; the only supported value
  int pyramid_levels = 3;             // downsampling factor 2 per level
  int max_iters_per_level = 200;
  double step_init = 0.1;             // initial line-search step, scaled units
  double step_shrink = 0.5;           // backtracking factor
  double converge_tol = 1e-6;         // relative cost decrease
  double fd_epsilon_translation = 0.5;  // mm
  double fd_epsilon_linear = 0.01;    // per linear-block entry

  void validate() const;
};

struct RegistrationResult {
  AffineTransform transform;  // moving world -> fixed world
  double final_cost = 0.0;    // mean squared intensity difference, finest level
  int iterations_used = 0;    // accepted steps, all levels
  bool converged = false;
  // Accepted costs per pyramid level, coarse to fine; entry 0 of each
  // level is the cost at that level's starting parameters.
  std::vector<std::vector<double>> cost_history;
};

// Minimises the mean squared difference between resample(moving, t,
// fixed-geometry, linear) and fixed. Deterministic; no randomness.
RegistrationResult register_affine(const Volume& moving, const Volume& fixed,
                                   const RegistrationConfig& cfg = {});

// Factor-2 mean pooling used to build the registration pyramid. Odd axes
// keep a partial trailing block; the affine is updated so world
// coordinates are preserved.
Volume downsample_by_two(const Volume& v);

}  // namespace regionwise

#pragma once

#include <cstdint>
#include <string>

#include "carenkf/linalg.hpp"

// Independent reference checks of the filter algebra. Every target here is
// built from explicit n x n matrices and a dense LU inverse, never from the
// trace identities, transforms or solves the library itself uses.
namespace carenkf::oracles {

struct Outcome {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed statistic
  double threshold = 0.0;  // pass bound for `measured`
  std::string detail;
};

/// Realized ETKF anomaly covariance vs the recalibrated, compensated
/// posterior target, worst relative Frobenius error over random instances.
Outcome etkf_target_covariance(int instances, Index n, Index m, Index ensemble, double beta,
                     std::uint64_t seed);

/// Perturbation-averaged stochastic analysis covariance vs the same target,
/// worst |mean - target| / standard error; also checks the exact analysis mean.
Outcome stochastic_target_covariance(Index n, Index m, Index ensemble, int redraws, double beta,
                     std::uint64_t seed);

/// Affine h: CAR and conventional ETKF transforms agree and back-out always
/// accepts along a linear-Gaussian run.
Outcome linear_reduction(int steps, std::uint64_t seed);

/// Quadratic h: mismatch = -(N-1)/(2N) tr(H_i P).
Outcome quadratic_mismatch(int instances, std::uint64_t seed);

/// Time-averaged NIS of a consistent conventional filter, relative error to m.
Outcome nis_consistency(int steps, std::uint64_t seed);

/// Pooled std of the Lorenz-96 initial ensemble-mean error against 1/sqrt(N).
Outcome initial_mean_error(int seeds, Index ensemble, std::uint64_t seed);

/// Observed global convergence order of RK4 on Lorenz-96.
Outcome rk4_order();

}  // namespace carenkf::oracles

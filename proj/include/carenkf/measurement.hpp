#pragma once

#include <vector>

#include "carenkf/ensemble.hpp"
#include "carenkf/linalg.hpp"
#include "carenkf/system_model.hpp"

namespace carenkf {

/// Measurement-space statistics of an ensemble at one linearization point
/// (the forecast ensemble or the ensemble recentered at the analysis mean).
struct MeasStats {
  Matrix z_ensemble;  // m x N, angular rows unwrapped around h(mean)
  Vector z_mean;
  Matrix z_anoms;     // m x N, rows sum to zero
  Matrix cross_cov;   // n x m, A Z^T / (N - 1)
  Vector h_at_mean;   // h(ensemble mean)
  Vector mismatch;    // h(mean) - z_mean
  std::vector<bool> angular;

  Index dim() const { return z_mean.size(); }
  Index ensemble_size() const { return z_anoms.cols(); }
};

struct InnovationCov {
  Matrix matrix;  // Z Z^T / (N - 1) + beta d d^T + R
  double beta_used = 0.0;
  Vector d_used;
};

/// Evaluates h on every member and on the ensemble mean. Angular components
/// of each member are unwrapped around h(mean) before averaging, so the
/// anomalies and the mismatch are small wrapped differences. Throws
/// EmptyMeasurement when h has no components.
MeasStats measure_stats(const Ensemble& e, const EnsembleStats& es, const MeasurementMap& h);
MeasStats measure_stats(const Ensemble& e, const MeasurementMap& h);

InnovationCov innovation_cov(const MeasStats& ms, const Matrix& r, double beta);

/// K = P_xz S^-1.
Matrix kalman_gain(const Matrix& cross_cov, const InnovationCov& s);

/// z - z_ref with angular components wrapped.
Vector innovation(const Vector& z, const Vector& z_ref, const std::vector<bool>& angular);

}  // namespace carenkf

#pragma once

#include "carenkf/linalg.hpp"
#include "carenkf/random.hpp"
#include "carenkf/system_model.hpp"

namespace carenkf {

/// n x N matrix of state columns; the filter's whole belief.
class Ensemble {
 public:
  /// Throws std::invalid_argument for fewer than two members and
  /// NonFiniteState for non-finite entries.
  explicit Ensemble(Matrix members);

  Index state_dim() const { return members_.rows(); }
  Index size() const { return members_.cols(); }
  const Matrix& members() const { return members_; }
  auto member(Index i) const { return members_.col(i); }

 private:
  Matrix members_;
};

struct EnsembleStats {
  Vector mean;
  Matrix anomalies;  // members - mean 1^T

  Index size() const { return anomalies.cols(); }
  /// trace(A A^T) / (N - 1) without forming the n x n matrix.
  double trace_cov() const;
  Matrix sample_cov() const;
};

EnsembleStats stats(const Ensemble& e);

/// Scales anomalies by sqrt(rho) about the unchanged mean. Throws InvalidRho
/// for rho < 1.
Ensemble inflate(const Ensemble& e, double rho);

/// member_i <- f(member_i) + w_i with w_i ~ N(0, Q). Throws NonFiniteState
/// if any propagated entry is not finite.
Ensemble propagate(const Ensemble& e, const SystemModel& model, int step, GaussianSampler& sampler);

/// new_mean 1^T + anomalies(e)
Ensemble recenter(const Ensemble& e, const Vector& new_mean);

Ensemble from_mean_and_anomalies(const Vector& mean, const Matrix& anomalies);

}  // namespace carenkf

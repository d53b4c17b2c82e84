#include "carenkf/measurement.hpp"

#include <stdexcept>

#include "carenkf/errors.hpp"

namespace carenkf {

MeasStats measure_stats(const Ensemble& e, const EnsembleStats& es, const MeasurementMap& h) {
  const Index m = h.dim();
  if (m == 0) {
    throw EmptyMeasurement("measure_stats: no active measurement components");
  }
  const Index n_members = e.size();

  MeasStats ms;
  ms.angular = h.angular;
  ms.h_at_mean = h.eval(es.mean);
  if (ms.h_at_mean.size() != m) {
    throw std::invalid_argument("measure_stats: measurement map returned wrong dimension");
  }

  ms.z_ensemble.resize(m, n_members);
  for (Index i = 0; i < n_members; ++i) {
    ms.z_ensemble.col(i) = h.eval(e.member(i));
  }
  if (h.has_angular()) {
    for (Index r = 0; r < m; ++r) {
      if (!h.angular[static_cast<std::size_t>(r)]) {
        continue;
      }
      const double ref = ms.h_at_mean(r);
      for (Index i = 0; i < n_members; ++i) {
        ms.z_ensemble(r, i) = ref + wrap_angle(ms.z_ensemble(r, i) - ref);
      }
    }
  }

  ms.z_mean = ms.z_ensemble.rowwise().mean();
  ms.z_anoms = ms.z_ensemble.colwise() - ms.z_mean;
  ms.cross_cov = es.anomalies * ms.z_anoms.transpose() / static_cast<double>(n_members - 1);
  ms.mismatch = innovation(ms.h_at_mean, ms.z_mean, ms.angular);
  return ms;
}

MeasStats measure_stats(const Ensemble& e, const MeasurementMap& h) {
  return measure_stats(e, stats(e), h);
}

InnovationCov innovation_cov(const MeasStats& ms, const Matrix& r, double beta) {
  if (beta < 0.0) {
    throw std::invalid_argument("innovation_cov: beta must be nonnegative");
  }
  if (r.rows() != ms.dim() || r.cols() != ms.dim()) {
    throw std::invalid_argument("innovation_cov: R has wrong dimension");
  }
  const auto denom = static_cast<double>(ms.ensemble_size() - 1);
  InnovationCov s;
  s.matrix = ms.z_anoms * ms.z_anoms.transpose() / denom + r;
  if (beta > 0.0) {
    s.matrix.noalias() += beta * ms.mismatch * ms.mismatch.transpose();
  }
  s.matrix = symmetrize(s.matrix);
  s.beta_used = beta;
  s.d_used = ms.mismatch;
  return s;
}

Matrix kalman_gain(const Matrix& cross_cov, const InnovationCov& s) {
  // K S = P_xz  <=>  S K^T = P_xz^T (S symmetric).
  return spd_solve(s.matrix, cross_cov.transpose()).transpose();
}

Vector innovation(const Vector& z, const Vector& z_ref, const std::vector<bool>& angular) {
  Vector e = z - z_ref;
  for (std::size_t r = 0; r < angular.size(); ++r) {
    if (angular[r]) {
      e(static_cast<Index>(r)) = wrap_angle(e(static_cast<Index>(r)));
    }
  }
  return e;
}

}  // namespace carenkf

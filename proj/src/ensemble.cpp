#include "carenkf/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "carenkf/errors.hpp"

namespace carenkf {

Ensemble::Ensemble(Matrix members) : members_(std::move(members)) {
  if (members_.cols() < 2) {
    throw std::invalid_argument("Ensemble: at least two members required, got " +
                                std::to_string(members_.cols()));
  }
  if (members_.rows() < 1) {
    throw std::invalid_argument("Ensemble: state dimension must be positive");
  }
  if (!members_.allFinite()) {
    throw NonFiniteState("Ensemble: non-finite member entries");
  }
}

double EnsembleStats::trace_cov() const {
  return anomalies.squaredNorm() / static_cast<double>(anomalies.cols() - 1);
}

Matrix EnsembleStats::sample_cov() const {
  return anomalies * anomalies.transpose() / static_cast<double>(anomalies.cols() - 1);
}

EnsembleStats stats(const Ensemble& e) {
  EnsembleStats s;
  s.mean = e.members().rowwise().mean();
  s.anomalies = e.members().colwise() - s.mean;
  return s;
}

Ensemble from_mean_and_anomalies(const Vector& mean, const Matrix& anomalies) {
  return Ensemble(anomalies.colwise() + mean);
}

Ensemble inflate(const Ensemble& e, double rho) {
  if (!(rho >= 1.0)) {
    throw InvalidRho("inflate: rho must be >= 1, got " + std::to_string(rho));
  }
  if (rho == 1.0) {
    return e;
  }
  const EnsembleStats s = stats(e);
  return from_mean_and_anomalies(s.mean, std::sqrt(rho) * s.anomalies);
}

Ensemble propagate(const Ensemble& e, const SystemModel& model, int step, GaussianSampler& sampler) {
  Matrix out(e.state_dim(), e.size());
  for (Index i = 0; i < e.size(); ++i) {
    out.col(i) = model.advance(e.member(i), step);
  }
  const Matrix& factor = model.process_noise_factor();
  if (factor.cols() > 0) {
    out.noalias() += factor * sampler.standard_normal(factor.cols(), e.size());
  }
  if (!out.allFinite()) {
    throw NonFiniteState("propagate: non-finite forecast at step " + std::to_string(step));
  }
  return Ensemble(std::move(out));
}

Ensemble recenter(const Ensemble& e, const Vector& new_mean) {
  const EnsembleStats s = stats(e);
  return from_mean_and_anomalies(new_mean, s.anomalies);
}

}  // namespace carenkf

#pragma once

#include <functional>
#include <vector>

#include "carenkf/linalg.hpp"

namespace carenkf {

/// Indices of the scalar measurement components observed at one step.
using ActiveSet = std::vector<Index>;

/// A measurement function restricted to the active components of one step.
/// `angular[r]` marks components whose differences must be wrapped to (-pi, pi].
struct MeasurementMap {
  std::function<Vector(const Vector&)> eval;
  std::vector<bool> angular;

  Index dim() const { return static_cast<Index>(angular.size()); }
  bool has_angular() const;

  static MeasurementMap plain(Index dim, std::function<Vector(const Vector&)> eval);
};

/// Dynamics, measurement and noise description consumed by the filters.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual Index state_dim() const = 0;
  /// Noise-free transition f(x) from step `step` to `step + 1`.
  virtual Vector advance(const Vector& x, int step) const = 0;
  /// L with Q = L L^T (n x r, r may be 0 for a perfect model).
  virtual const Matrix& process_noise_factor() const = 0;
  virtual MeasurementMap measurement(const ActiveSet& active) const = 0;
  virtual Matrix measurement_noise(const ActiveSet& active) const = 0;
  /// State coordinates entering the RMSE metric.
  virtual std::vector<Index> metric_indices() const = 0;
};

/// x' = F x + w, z = H x + v.
class LinearGaussianModel final : public SystemModel {
 public:
  LinearGaussianModel(Matrix transition, Matrix process_cov, Matrix observation, Matrix obs_cov);

  Index state_dim() const override { return transition_.rows(); }
  Vector advance(const Vector& x, int step) const override;
  const Matrix& process_noise_factor() const override { return noise_factor_; }
  MeasurementMap measurement(const ActiveSet& active) const override;
  Matrix measurement_noise(const ActiveSet& active) const override;
  std::vector<Index> metric_indices() const override;

  ActiveSet all_components() const;
  const Matrix& observation() const { return observation_; }

 private:
  Matrix transition_;
  Matrix noise_factor_;
  Matrix observation_;
  Matrix obs_cov_;
};

}  // namespace carenkf

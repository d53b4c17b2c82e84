#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "carenkf/ensemble.hpp"
#include "carenkf/random.hpp"
#include "carenkf/system_model.hpp"

namespace carenkf {

/// A system model that can also generate its own identical-twin truth.
class BenchmarkModel : public SystemModel {
 public:
  virtual std::string name() const = 0;
  virtual Vector sample_initial_truth(GaussianSampler& sampler) const = 0;
  /// Diagonal standard deviations of the initial ensemble spread.
  virtual Vector prior_stddev() const = 0;
  /// Measurement components observed when the system is at `truth`.
  virtual ActiveSet visible(const Vector& truth) const = 0;
  virtual Vector measure(const Vector& x, const ActiveSet& active) const = 0;
  virtual int default_steps() const = 0;
  virtual Index default_ensemble_size() const = 0;
};

// ---------------------------------------------------------------------------
// Feature-based SLAM with range-bearing observations and known correspondence.
// State: [p_x, p_y, theta, l1_x, l1_y, ..., lM_x, lM_y].

struct SlamParams {
  int landmarks = 150;
  double sensor_range = 30.0;
  double dt = 1.0;
  int period = 50;
  double speed = 8.0;
  double world_half_width = 90.0;
  double process_std_x = 0.1;
  double process_std_y = 0.1;
  double process_std_theta = 0.01;
  double sigma_range = 0.1;
  double sigma_bearing = 0.01;
  double pose_prior_std_xy = 2.0;
  double pose_prior_std_theta = 15.0 * std::numbers::pi / 180.0;
  double landmark_prior_std = 8.0;

  double turn_rate() const { return 2.0 * std::numbers::pi / period; }
  /// Baseline noise with both measurement standard deviations scaled by s.
  static SlamParams with_noise_scale(double s);
};

class SlamModel final : public BenchmarkModel {
 public:
  explicit SlamModel(SlamParams params = {});

  const SlamParams& params() const { return params_; }

  std::string name() const override { return "slam"; }
  Index state_dim() const override { return 3 + 2 * static_cast<Index>(params_.landmarks); }
  Vector advance(const Vector& x, int step) const override;
  const Matrix& process_noise_factor() const override { return noise_factor_; }
  MeasurementMap measurement(const ActiveSet& active) const override;
  Matrix measurement_noise(const ActiveSet& active) const override;
  std::vector<Index> metric_indices() const override;

  Vector sample_initial_truth(GaussianSampler& sampler) const override;
  Vector prior_stddev() const override;
  ActiveSet visible(const Vector& truth) const override;
  Vector measure(const Vector& x, const ActiveSet& active) const override;
  int default_steps() const override { return params_.period; }
  Index default_ensemble_size() const override { return 100; }

  /// Start pose (theta = 0) whose circular walk is centred on the origin.
  Vector start_pose() const;
  std::vector<int> visible_landmarks(const Vector& truth) const;
  static ActiveSet components_of(const std::vector<int>& landmarks);

 private:
  SlamParams params_;
  Matrix noise_factor_;
};

/// Range and bearing to each listed landmark, stacked in list order; bearings
/// are wrapped to (-pi, pi].
Vector slam_measure(const Vector& x, const std::vector<int>& landmarks);

// ---------------------------------------------------------------------------
// Lorenz-96 with squared odd-index observations.

struct Lorenz96Params {
  Index dim = 40;
  double forcing = 8.0;
  double dt = 0.05;
  double sigma_obs = 1e-2;
  int spin_up = 1000;
  int steps = 120;

  static Lorenz96Params with_noise_scale(double s);
};

class Lorenz96Model final : public BenchmarkModel {
 public:
  explicit Lorenz96Model(Lorenz96Params params = {});

  const Lorenz96Params& params() const { return params_; }

  std::string name() const override { return "lorenz96"; }
  Index state_dim() const override { return params_.dim; }
  Vector advance(const Vector& x, int step) const override;
  const Matrix& process_noise_factor() const override { return noise_factor_; }
  MeasurementMap measurement(const ActiveSet& active) const override;
  Matrix measurement_noise(const ActiveSet& active) const override;
  std::vector<Index> metric_indices() const override;

  Vector sample_initial_truth(GaussianSampler& sampler) const override;
  Vector prior_stddev() const override;
  ActiveSet visible(const Vector& truth) const override;
  Vector measure(const Vector& x, const ActiveSet& active) const override;
  int default_steps() const override { return params_.steps; }
  Index default_ensemble_size() const override { return 50; }

 private:
  Lorenz96Params params_;
  Matrix noise_factor_;
};

Vector lorenz96_rhs(const Vector& x, double forcing = 8.0);
/// Classical RK4 step of the Lorenz-96 flow. Throws NonFiniteState on blow-up.
Vector rk4_step(const Vector& x, double dt, double forcing = 8.0);
/// [x_1^2, x_3^2, ..., x_{n-1}^2] in 1-based indexing.
Vector lorenz96_measure(const Vector& x);

// ---------------------------------------------------------------------------

/// f(x) + w with w ~ N(0, Q).
Vector simulate_step(const SystemModel& model, const Vector& x, int step, GaussianSampler& sampler);

struct TruthTrajectory {
  Vector initial;
  std::vector<Vector> states;        // states[k - 1] is the truth at step k
  std::vector<ActiveSet> active;     // observed components at step k
  std::vector<Vector> observations;  // noisy measurements at step k

  int steps() const { return static_cast<int>(states.size()); }
};

/// Deterministic in (model, run_seed, steps); draws from the Truth stream.
TruthTrajectory make_truth(const BenchmarkModel& model, std::uint64_t run_seed, int steps);

/// truth0 + N(0, diag(prior_stddev^2)) draws.
Ensemble make_initial_ensemble(const BenchmarkModel& model, const Vector& truth0, Index size,
                               GaussianSampler& sampler);

}  // namespace carenkf

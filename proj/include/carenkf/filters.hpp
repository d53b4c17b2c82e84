#pragma once

#include <string>
#include <string_view>

#include "carenkf/ensemble.hpp"
#include "carenkf/measurement.hpp"
#include "carenkf/random.hpp"
#include "carenkf/system_model.hpp"

namespace carenkf {

enum class Variant { Stochastic, Etkf };

// Conventional: inflated forecast, plain EnKF update.
// Improvement1: inflated forecast, recalibration and back-out, beta frozen at 0.
// Car: no inflation, recalibration and back-out, adaptive compensation.
enum class Mode { Conventional, Improvement1, Car };

std::string to_string(Variant v);
std::string to_string(Mode m);
Variant parse_variant(std::string_view name);
Mode parse_mode(std::string_view name);

struct FilterConfig {
  Variant variant = Variant::Etkf;
  Mode mode = Mode::Car;
  double rho = 1.05;
  double beta0 = 2.0;
  double lambda = 0.9;
  double mu = 0.1;

  /// Car mode never inflates.
  double effective_rho() const { return mode == Mode::Car ? 1.0 : rho; }
  bool recalibrates() const { return mode != Mode::Conventional; }
  bool adapts_beta() const { return mode == Mode::Car; }
  std::string label() const { return to_string(variant) + "/" + to_string(mode); }
  /// Throws std::invalid_argument on rho < 1, beta0 < 0, lambda outside
  /// (0, 1) or mu <= 0.
  void validate() const;
};

/// Adaptive compensation state. The excess of the NIS over the measurement
/// dimension is what gets smoothed, so steps with different dimensions mix.
struct CompensationState {
  double beta = 0.0;
  double excess_smoothed = 0.0;
  bool initialized = false;

  static CompensationState initial(const FilterConfig& cfg);
};

struct StepReport {
  bool accepted = true;
  bool recalibrated = false;
  double trace_forecast = 0.0;
  double trace_posterior_target = 0.0;
  double nis = 0.0;
  double beta_after = 0.0;
  Index m = 0;
};

struct StepResult {
  Ensemble analysis;
  CompensationState comp;
  StepReport report;
};

/// Random streams owned by one filter instance.
struct FilterRng {
  GaussianSampler process;
  GaussianSampler perturbation;

  static FilterRng for_run(std::uint64_t run_seed);
};

/// One predict/update cycle. An empty `active` set runs the predict stage only.
StepResult step(const Ensemble& previous, const SystemModel& model, int step_index,
                const ActiveSet& active, const Vector& z, const FilterConfig& cfg,
                const CompensationState& comp, FilterRng& rng);

/// Measurement update of an already-forecast (and inflated) ensemble.
StepResult analyze(const Ensemble& forecast, const MeasurementMap& h, const Matrix& r,
                   const Vector& z, const FilterConfig& cfg, const CompensationState& comp,
                   GaussianSampler& perturbation);

Vector mean_update(const Vector& forecast_mean, const Matrix& gain, const Vector& z,
                   const Vector& z_mean, const std::vector<bool>& angular = {});

/// x_i + K(z + eta_i - z_i), eta_i ~ N(0, R); no recentering.
Ensemble conventional_stochastic_update(const Ensemble& forecast, const Matrix& gain,
                                        const Vector& z, const MeasStats& forecast_meas,
                                        const Matrix& r, GaussianSampler& sampler);

/// (I - Z^T (Z Z^T + (N-1) R)^-1 Z)^(1/2)
Matrix conventional_etkf_transform(const Matrix& z_anoms, const Matrix& r);

/// Perturbed-observation update on the recentered ensemble with
/// eta_i ~ N(0, R + beta d d^T), then translated so the mean is exactly
/// `analysis_mean`.
Ensemble car_stochastic_update(const Ensemble& recentered, const Matrix& gain, const Vector& z,
                               const MeasStats& recentered_meas, const Matrix& r, double beta,
                               const Vector& analysis_mean, GaussianSampler& sampler);

/// Symmetric square-root transform whose anomaly covariance hits the
/// recalibrated (and compensated) posterior target exactly.
Matrix car_etkf_transform(const Matrix& zf_anoms, const Matrix& zrc_anoms, const Matrix& r,
                          double beta, const Vector& d_f, const Vector& d_rc);

struct PosteriorTrace {
  double target = 0.0;
  double forecast = 0.0;
};

/// tr(P^f + K S K^T - K P_xz^T - P_xz K^T) by cyclic-trace identities.
PosteriorTrace posterior_target_trace(double trace_forecast, const Matrix& gain,
                                      const Matrix& s_used, const Matrix& cross_cov_rc);

inline bool backout_accepts(double trace_target, double trace_forecast) {
  return trace_target <= trace_forecast;
}

/// e^T S^-1 e
double nis(const Vector& innovation, const Matrix& s);

CompensationState beta_update(const CompensationState& comp, const Vector& innovation,
                              const Matrix& s_used, Index m, const FilterConfig& cfg);

}  // namespace carenkf

#include "carenkf/filters.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "carenkf/errors.hpp"

namespace carenkf {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Stochastic:
      return "stochastic";
    case Variant::Etkf:
      return "etkf";
  }
  return "?";
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Conventional:
      return "conventional";
    case Mode::Improvement1:
      return "i1";
    case Mode::Car:
      return "car";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "stochastic") return Variant::Stochastic;
  if (name == "etkf") return Variant::Etkf;
  throw std::invalid_argument("unknown filter variant '" + std::string(name) +
                              "' (expected stochastic|etkf)");
}

Mode parse_mode(std::string_view name) {
  if (name == "conventional") return Mode::Conventional;
  if (name == "i1") return Mode::Improvement1;
  if (name == "car") return Mode::Car;
  throw std::invalid_argument("unknown filter mode '" + std::string(name) +
                              "' (expected conventional|i1|car)");
}

void FilterConfig::validate() const {
  if (!(rho >= 1.0)) throw InvalidRho("FilterConfig: rho must be >= 1");
  if (!(beta0 >= 0.0)) throw std::invalid_argument("FilterConfig: beta0 must be >= 0");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("FilterConfig: lambda must lie in (0, 1)");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("FilterConfig: mu must be > 0");
}

CompensationState CompensationState::initial(const FilterConfig& cfg) {
  CompensationState c;
  c.beta = cfg.adapts_beta() ? cfg.beta0 : 0.0;
  return c;
}

FilterRng FilterRng::for_run(std::uint64_t run_seed) {
  return FilterRng{GaussianSampler::for_stream(run_seed, Stream::ProcessNoise),
                   GaussianSampler::for_stream(run_seed, Stream::ObservationPerturbation)};
}

Vector mean_update(const Vector& forecast_mean, const Matrix& gain, const Vector& z,
                   const Vector& z_mean, const std::vector<bool>& angular) {
  return forecast_mean + gain * innovation(z, z_mean, angular);
}

namespace {

// Perturbed-observation member update x_i + K(wrap(z - z_i) + eta_i).
Matrix perturbed_members(const Matrix& members, const Matrix& gain, const Vector& z,
                         const MeasStats& ms, const Matrix& eta) {
  Matrix innovations(ms.dim(), ms.ensemble_size());
  for (Index i = 0; i < ms.ensemble_size(); ++i) {
    innovations.col(i) = innovation(z, ms.z_ensemble.col(i), ms.angular);
  }
  innovations += eta;
  return members + gain * innovations;
}

}  // namespace

Ensemble conventional_stochastic_update(const Ensemble& forecast, const Matrix& gain,
                                        const Vector& z, const MeasStats& forecast_meas,
                                        const Matrix& r, GaussianSampler& sampler) {
  const Matrix eta = sample_gaussian(sampler, r, forecast.size());
  return Ensemble(perturbed_members(forecast.members(), gain, z, forecast_meas, eta));
}

Matrix conventional_etkf_transform(const Matrix& z_anoms, const Matrix& r) {
  const Index n_members = z_anoms.cols();
  const auto scale = static_cast<double>(n_members - 1);
  const Matrix g = z_anoms * z_anoms.transpose() + scale * r;
  const Matrix w = spd_solve(g, z_anoms);
  Matrix inner = Matrix::Identity(n_members, n_members) - z_anoms.transpose() * w;
  return sym_sqrt_psd(symmetrize(inner));
}

Ensemble car_stochastic_update(const Ensemble& recentered, const Matrix& gain, const Vector& z,
                               const MeasStats& recentered_meas, const Matrix& r, double beta,
                               const Vector& analysis_mean, GaussianSampler& sampler) {
  const Matrix eta =
      sample_gaussian_rank1(sampler, r, beta, recentered_meas.mismatch, recentered.size());
  const Ensemble temporary(perturbed_members(recentered.members(), gain, z, recentered_meas, eta));
  return recenter(temporary, analysis_mean);
}

Matrix car_etkf_transform(const Matrix& zf_anoms, const Matrix& zrc_anoms, const Matrix& r,
                          double beta, const Vector& d_f, const Vector& d_rc) {
  if (beta < 0.0) {
    throw std::invalid_argument("car_etkf_transform: beta must be nonnegative");
  }
  const Index n_members = zf_anoms.cols();
  const auto scale = static_cast<double>(n_members - 1);

  Matrix g_f = zf_anoms * zf_anoms.transpose() + scale * r;
  Matrix gamma = zrc_anoms * zrc_anoms.transpose() + scale * r;
  if (beta > 0.0) {
    g_f.noalias() += scale * beta * d_f * d_f.transpose();
    gamma.noalias() += scale * beta * d_rc * d_rc.transpose();
  }
  // w = B Z_f, cross = Z_rc^T B Z_f.
  const Matrix w = spd_solve(symmetrize(g_f), zf_anoms);
  const Matrix cross = zrc_anoms.transpose() * w;
  Matrix inner = Matrix::Identity(n_members, n_members) - cross - cross.transpose() +
                 w.transpose() * gamma * w;
  return sym_sqrt_psd(symmetrize(inner));
}

PosteriorTrace posterior_target_trace(double trace_forecast, const Matrix& gain,
                                      const Matrix& s_used, const Matrix& cross_cov_rc) {
  // tr(K S K^T) = sum((K S) .* K), tr(K P^T) = tr(P K^T) = sum(K .* P).
  const double gain_term = (gain * s_used).cwiseProduct(gain).sum();
  const double cross_term = gain.cwiseProduct(cross_cov_rc).sum();
  return PosteriorTrace{trace_forecast + gain_term - 2.0 * cross_term, trace_forecast};
}

double nis(const Vector& innovation, const Matrix& s) {
  return innovation.dot(spd_solve(s, innovation).col(0));
}

CompensationState beta_update(const CompensationState& comp, const Vector& innovation,
                              const Matrix& s_used, Index m, const FilterConfig& cfg) {
  if (m < 1) {
    throw std::invalid_argument("beta_update: measurement dimension must be positive");
  }
  const double excess = nis(innovation, s_used) - static_cast<double>(m);
  CompensationState next = comp;
  next.excess_smoothed =
      comp.initialized ? cfg.lambda * comp.excess_smoothed + (1.0 - cfg.lambda) * excess : excess;
  next.initialized = true;
  next.beta = std::max(comp.beta + cfg.mu * next.excess_smoothed, 0.0);
  return next;
}

StepResult analyze(const Ensemble& forecast, const MeasurementMap& h, const Matrix& r,
                   const Vector& z, const FilterConfig& cfg, const CompensationState& comp,
                   GaussianSampler& perturbation) {
  if (z.size() != h.dim()) {
    throw std::invalid_argument("analyze: measurement vector does not match the active set");
  }
  const EnsembleStats fs = stats(forecast);
  const MeasStats msf = measure_stats(forecast, fs, h);
  const double beta = cfg.adapts_beta() ? comp.beta : 0.0;
  const InnovationCov sf = innovation_cov(msf, r, beta);
  const Matrix gain = kalman_gain(msf.cross_cov, sf);
  const Vector e = innovation(z, msf.z_mean, msf.angular);
  const Vector analysis_mean = fs.mean + gain * e;

  StepReport report;
  report.m = h.dim();
  report.trace_forecast = fs.trace_cov();
  report.nis = nis(e, sf.matrix);

  std::optional<Ensemble> analysis;
  if (!cfg.recalibrates()) {
    report.trace_posterior_target =
        report.trace_forecast - (gain * sf.matrix).cwiseProduct(gain).sum();
    if (cfg.variant == Variant::Stochastic) {
      analysis = conventional_stochastic_update(forecast, gain, z, msf, r, perturbation);
    } else {
      const Matrix t = conventional_etkf_transform(msf.z_anoms, r);
      analysis = from_mean_and_anomalies(analysis_mean, fs.anomalies * t);
    }
  } else {
    report.recalibrated = true;
    const Ensemble recentered = from_mean_and_anomalies(analysis_mean, fs.anomalies);
    const EnsembleStats rcs{analysis_mean, fs.anomalies};
    const MeasStats ms_rc = measure_stats(recentered, rcs, h);
    const InnovationCov s_rc = innovation_cov(ms_rc, r, beta);
    const PosteriorTrace target =
        posterior_target_trace(report.trace_forecast, gain, s_rc.matrix, ms_rc.cross_cov);
    report.trace_posterior_target = target.target;
    report.accepted = backout_accepts(target.target, target.forecast);
    if (!report.accepted) {
      analysis = forecast;
    } else if (cfg.variant == Variant::Stochastic) {
      analysis = car_stochastic_update(recentered, gain, z, ms_rc, r, beta, analysis_mean,
                                       perturbation);
    } else {
      const Matrix t =
          car_etkf_transform(msf.z_anoms, ms_rc.z_anoms, r, beta, msf.mismatch, ms_rc.mismatch);
      analysis = from_mean_and_anomalies(analysis_mean, fs.anomalies * t);
    }
  }

  CompensationState next = comp;
  if (cfg.adapts_beta()) {
    next = beta_update(comp, e, sf.matrix, report.m, cfg);
  }
  report.beta_after = next.beta;
  return StepResult{std::move(*analysis), next, report};
}

StepResult step(const Ensemble& previous, const SystemModel& model, int step_index,
                const ActiveSet& active, const Vector& z, const FilterConfig& cfg,
                const CompensationState& comp, FilterRng& rng) {
  const Ensemble forecast =
      inflate(propagate(previous, model, step_index, rng.process), cfg.effective_rho());
  if (active.empty()) {
    StepReport report;
    report.trace_forecast = stats(forecast).trace_cov();
    report.trace_posterior_target = report.trace_forecast;
    report.beta_after = comp.beta;
    return StepResult{forecast, comp, report};
  }
  return analyze(forecast, model.measurement(active), model.measurement_noise(active), z, cfg,
                 comp, rng.perturbation);
}

}  // namespace carenkf

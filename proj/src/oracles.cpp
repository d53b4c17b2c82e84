#include "carenkf/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "carenkf/benchmarks.hpp"
#include "carenkf/ensemble.hpp"
#include "carenkf/filters.hpp"
#include "carenkf/measurement.hpp"

namespace carenkf::oracles {

namespace {

// h(x) = A x + (k/2) (B x).^2 + 0.3 sin(B x)
struct RandomNonlinearMap {
  Matrix a;
  Matrix b;
  double curvature = 1.0;

  Vector operator()(const Vector& x) const {
    const Vector q = b * x;
    return a * x + (0.5 * curvature) * q.cwiseProduct(q) + 0.3 * q.array().sin().matrix();
  }
};

RandomNonlinearMap random_map(GaussianSampler& rng, Index m, Index n) {
  RandomNonlinearMap h;
  h.a = rng.standard_normal(m, n) / std::sqrt(static_cast<double>(n));
  h.b = rng.standard_normal(m, n) / std::sqrt(static_cast<double>(n));
  h.curvature = rng.uniform(0.5, 2.0);
  return h;
}

Matrix evaluate_columns(const RandomNonlinearMap& h, const Matrix& x) {
  Matrix z(h.a.rows(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) z.col(i) = h(x.col(i));
  return z;
}

// One random forecast/measurement instance.
struct Instance {
  Matrix members;
  RandomNonlinearMap h;
  Matrix r;
  Vector z;
};

Instance random_instance(GaussianSampler& rng, Index n, Index m, Index ensemble) {
  Instance inst;
  const Vector center = rng.standard_normal(n, 1);
  const double spread = rng.uniform(0.2, 0.8);
  inst.members = (spread * rng.standard_normal(n, ensemble)).colwise() + center;
  inst.h = random_map(rng, m, n);
  Vector var(m);
  for (Index i = 0; i < m; ++i) var(i) = rng.uniform(0.01, 0.2);
  inst.r = var.asDiagonal();
  const Vector truth = center + 0.5 * rng.standard_normal(n, 1);
  inst.z = inst.h(truth) + var.cwiseSqrt().cwiseProduct(rng.standard_normal(m, 1).col(0));
  return inst;
}

// Explicit recalibrated posterior covariance target.
struct Target {
  Matrix forecast_cov;
  Matrix gain;
  Vector analysis_mean;
  Matrix posterior;
};

Target explicit_target(const Instance& inst, double beta) {
  const Matrix& x = inst.members;
  const auto denom = static_cast<double>(x.cols() - 1);
  const Vector xbar = x.rowwise().mean();
  const Matrix a = x.colwise() - xbar;

  const Matrix zf = evaluate_columns(inst.h, x);
  const Vector zf_bar = zf.rowwise().mean();
  const Matrix zf_anom = zf.colwise() - zf_bar;
  const Vector d_f = inst.h(xbar) - zf_bar;

  Target t;
  t.forecast_cov = a * a.transpose() / denom;
  const Matrix pxz = a * zf_anom.transpose() / denom;
  const Matrix sf = zf_anom * zf_anom.transpose() / denom + beta * d_f * d_f.transpose() + inst.r;
  t.gain = pxz * sf.fullPivLu().inverse();
  t.analysis_mean = xbar + t.gain * (inst.z - zf_bar);

  const Matrix xrc = a.colwise() + t.analysis_mean;
  const Matrix zrc = evaluate_columns(inst.h, xrc);
  const Vector zrc_bar = zrc.rowwise().mean();
  const Matrix zrc_anom = zrc.colwise() - zrc_bar;
  const Vector d_rc = inst.h(t.analysis_mean) - zrc_bar;
  const Matrix pxz_rc = a * zrc_anom.transpose() / denom;
  const Matrix src =
      zrc_anom * zrc_anom.transpose() / denom + beta * d_rc * d_rc.transpose() + inst.r;
  t.posterior = t.forecast_cov + t.gain * src * t.gain.transpose() -
                t.gain * pxz_rc.transpose() - pxz_rc * t.gain.transpose();
  return t;
}

MeasurementMap as_map(const RandomNonlinearMap& h) {
  return MeasurementMap::plain(h.a.rows(), [h](const Vector& x) { return h(x); });
}

double rel_fro(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

LinearGaussianModel small_linear_model(GaussianSampler& rng) {
  const double c = std::cos(0.3);
  const double s = std::sin(0.3);
  Matrix f = Matrix::Zero(4, 4);
  f.block<2, 2>(0, 0) << c, -s, s, c;
  f.block<2, 2>(2, 2) << c, s, -s, c;
  f *= 0.95;
  f(0, 2) = 0.1;
  Matrix h = rng.standard_normal(2, 4);
  return LinearGaussianModel(f, 0.05 * Matrix::Identity(4, 4), h, 0.1 * Matrix::Identity(2, 2));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

Outcome etkf_target_covariance(int instances, Index n, Index m, Index ensemble, double beta,
                     std::uint64_t seed) {
  GaussianSampler rng(seed);
  FilterConfig cfg;
  cfg.variant = Variant::Etkf;
  cfg.mode = Mode::Car;
  CompensationState comp;
  comp.beta = beta;

  double worst = 0.0;
  int accepted = 0;
  for (int k = 0; k < instances; ++k) {
    const Instance inst = random_instance(rng, n, m, ensemble);
    const Target target = explicit_target(inst, beta);
    const MeasurementMap h = as_map(inst.h);

    // Transform route: realized anomaly covariance regardless of back-out.
    const Ensemble forecast(inst.members);
    const EnsembleStats fs = stats(forecast);
    const MeasStats msf = measure_stats(forecast, fs, h);
    const Matrix gain = kalman_gain(msf.cross_cov, innovation_cov(msf, inst.r, beta));
    const Vector xa = mean_update(fs.mean, gain, inst.z, msf.z_mean);
    const EnsembleStats rcs{xa, fs.anomalies};
    const MeasStats ms_rc = measure_stats(from_mean_and_anomalies(xa, fs.anomalies), rcs, h);
    const Matrix t =
        car_etkf_transform(msf.z_anoms, ms_rc.z_anoms, inst.r, beta, msf.mismatch, ms_rc.mismatch);
    const Matrix realized_anoms = fs.anomalies * t;
    const Matrix realized =
        realized_anoms * realized_anoms.transpose() / static_cast<double>(ensemble - 1);
    worst = std::max(worst, rel_fro(realized, target.posterior));

    // Full analysis route when the update is accepted.
    GaussianSampler unused(0);
    const StepResult step = analyze(forecast, h, inst.r, inst.z, cfg, comp, unused);
    if (step.report.accepted) {
      ++accepted;
      worst = std::max(worst, rel_fro(stats(step.analysis).sample_cov(), target.posterior));
      worst = std::max(worst, (stats(step.analysis).mean - target.analysis_mean).norm() /
                                  std::max(target.analysis_mean.norm(), 1.0));
    }
  }
  Outcome out;
  out.name = "etkf_target_covariance (beta=" + fmt(beta) + ")";
  out.measured = worst;
  out.threshold = 1e-8;
  out.passed = worst <= out.threshold;
  out.detail = std::to_string(instances) + " instances, " + std::to_string(accepted) +
               " accepted by back-out; worst relative Frobenius error " + fmt(worst);
  return out;
}

Outcome stochastic_target_covariance(Index n, Index m, Index ensemble, int redraws, double beta,
                     std::uint64_t seed) {
  GaussianSampler rng(seed);
  const Instance inst = random_instance(rng, n, m, ensemble);
  const Target target = explicit_target(inst, beta);
  const MeasurementMap h = as_map(inst.h);

  const Ensemble forecast(inst.members);
  const EnsembleStats fs = stats(forecast);
  const MeasStats msf = measure_stats(forecast, fs, h);
  const Matrix gain = kalman_gain(msf.cross_cov, innovation_cov(msf, inst.r, beta));
  const Vector xa = mean_update(fs.mean, gain, inst.z, msf.z_mean);
  const Ensemble recentered = from_mean_and_anomalies(xa, fs.anomalies);
  const MeasStats ms_rc = measure_stats(recentered, EnsembleStats{xa, fs.anomalies}, h);

  Matrix sum = Matrix::Zero(n, n);
  Matrix sum_sq = Matrix::Zero(n, n);
  double worst_mean = 0.0;
  GaussianSampler perturb(seed ^ 0x5bd1e995ULL);
  for (int k = 0; k < redraws; ++k) {
    const Ensemble out = car_stochastic_update(recentered, gain, inst.z, ms_rc, inst.r, beta, xa,
                                               perturb);
    const EnsembleStats os = stats(out);
    const Matrix p = os.sample_cov();
    sum += p;
    sum_sq += p.cwiseProduct(p);
    worst_mean = std::max(worst_mean, (os.mean - target.analysis_mean).cwiseAbs().maxCoeff() /
                                          std::max(1.0, target.analysis_mean.cwiseAbs().maxCoeff()));
  }
  const auto count = static_cast<double>(redraws);
  const Matrix mean = sum / count;
  const Matrix var = (sum_sq / count - mean.cwiseProduct(mean)) * (count / (count - 1.0));
  double worst_z = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double se = std::sqrt(std::max(var(i, j), 0.0) / count);
      worst_z = std::max(worst_z, std::abs(mean(i, j) - target.posterior(i, j)) / se);
    }
  }
  Outcome out;
  out.name = "stochastic_target_covariance";
  out.measured = worst_z;
  out.threshold = 3.0;
  out.passed = worst_z <= 3.0 && worst_mean <= 1e-12;
  out.detail = std::to_string(redraws) + " redraws; worst |mean - target| = " + fmt(worst_z) +
               " standard errors; worst analysis-mean deviation " + fmt(worst_mean);
  return out;
}

Outcome linear_reduction(int steps, std::uint64_t seed) {
  GaussianSampler rng(seed);
  const LinearGaussianModel model = small_linear_model(rng);
  const ActiveSet active = model.all_components();
  const MeasurementMap h = model.measurement(active);
  const Matrix r = model.measurement_noise(active);

  FilterConfig car;
  car.variant = Variant::Etkf;
  car.mode = Mode::Car;
  FilterConfig conventional = car;
  conventional.mode = Mode::Conventional;
  conventional.rho = 1.0;

  Vector truth = 2.0 * rng.standard_normal(4, 1);
  Ensemble ensemble(rng.standard_normal(4, 20).colwise() + truth);
  CompensationState comp = CompensationState::initial(car);
  GaussianSampler process(seed + 1);
  GaussianSampler unused(0);

  double worst_transform = 0.0;
  double worst_ensemble = 0.0;
  int rejected = 0;
  for (int k = 0; k < steps; ++k) {
    truth = simulate_step(model, truth, k, rng);
    const Vector z = model.observation() * truth +
                     r.cwiseSqrt() * rng.standard_normal(2, 1).col(0);
    const Ensemble forecast = propagate(ensemble, model, k, process);

    const EnsembleStats fs = stats(forecast);
    const MeasStats msf = measure_stats(forecast, fs, h);
    const Matrix gain = kalman_gain(msf.cross_cov, innovation_cov(msf, r, comp.beta));
    const Vector xa = mean_update(fs.mean, gain, z, msf.z_mean);
    const MeasStats ms_rc =
        measure_stats(from_mean_and_anomalies(xa, fs.anomalies), EnsembleStats{xa, fs.anomalies}, h);
    const Matrix t_car =
        car_etkf_transform(msf.z_anoms, ms_rc.z_anoms, r, comp.beta, msf.mismatch, ms_rc.mismatch);
    const Matrix t_conv = conventional_etkf_transform(msf.z_anoms, r);
    worst_transform = std::max(worst_transform, (t_car - t_conv).norm());

    const StepResult a = analyze(forecast, h, r, z, car, comp, unused);
    const StepResult b = analyze(forecast, h, r, z, conventional, comp, unused);
    if (!a.report.accepted) ++rejected;
    worst_ensemble = std::max(
        worst_ensemble, (a.analysis.members() - b.analysis.members()).cwiseAbs().maxCoeff());
    ensemble = a.analysis;
    comp = a.comp;
  }
  Outcome out;
  out.name = "linear reduction";
  out.measured = std::max(worst_transform, worst_ensemble);
  out.threshold = 1e-10;
  out.passed = worst_transform <= 1e-10 && worst_ensemble <= 1e-10 && rejected == 0;
  out.detail = std::to_string(steps) + " steps; worst transform gap " + fmt(worst_transform) +
               ", worst ensemble gap " + fmt(worst_ensemble) + ", back-out rejections " +
               std::to_string(rejected);
  return out;
}

Outcome quadratic_mismatch(int instances, std::uint64_t seed) {
  GaussianSampler rng(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const auto n = static_cast<Index>(2 + k % 7);
    const auto ensemble = static_cast<Index>(3 + (k * 7) % 28);
    const auto m = static_cast<Index>(1 + k % 5);
    const Vector center = rng.standard_normal(n, 1);
    const Matrix x = (rng.uniform(0.1, 2.0) * rng.standard_normal(n, ensemble)).colwise() + center;

    std::vector<Matrix> hess;
    Matrix lin = rng.standard_normal(m, n);
    const Vector offset = rng.standard_normal(m, 1);
    for (Index i = 0; i < m; ++i) {
      const Matrix g = rng.standard_normal(n, n);
      hess.push_back(g + g.transpose());
    }
    auto h = [&](const Vector& v) {
      Vector out = offset + lin * v;
      for (Index i = 0; i < m; ++i) out(i) += 0.5 * v.dot(hess[static_cast<std::size_t>(i)] * v);
      return out;
    };
    const MeasStats ms = measure_stats(Ensemble(x), MeasurementMap::plain(m, h));

    const Vector xbar = x.rowwise().mean();
    const Matrix a = x.colwise() - xbar;
    const auto nn = static_cast<double>(ensemble);
    const Matrix p = a * a.transpose() / (nn - 1.0);
    for (Index i = 0; i < m; ++i) {
      const Matrix& hi = hess[static_cast<std::size_t>(i)];
      const double closed = -(nn - 1.0) / (2.0 * nn) * (hi * p).trace();
      const double scale = std::max(std::abs(closed), (nn - 1.0) / (2.0 * nn) * hi.norm() * p.norm());
      worst = std::max(worst, std::abs(ms.mismatch(i) - closed) / scale);
    }
  }
  Outcome out;
  out.name = "quadratic mismatch identity";
  out.measured = worst;
  out.threshold = 1e-10;
  out.passed = worst <= 1e-10;
  out.detail = std::to_string(instances) + " random ensembles/maps; worst relative error " + fmt(worst);
  return out;
}

Outcome nis_consistency(int steps, std::uint64_t seed) {
  GaussianSampler rng(seed);
  const LinearGaussianModel model = small_linear_model(rng);
  const ActiveSet active = model.all_components();
  const Matrix r = model.measurement_noise(active);

  FilterConfig cfg;
  cfg.variant = Variant::Etkf;
  cfg.mode = Mode::Conventional;
  cfg.rho = 1.0;

  Vector truth = rng.standard_normal(4, 1);
  Ensemble ensemble(rng.standard_normal(4, 100).colwise() + truth);
  CompensationState comp = CompensationState::initial(cfg);
  FilterRng filter_rng = FilterRng::for_run(seed);
  double total = 0.0;
  for (int k = 0; k < steps; ++k) {
    truth = simulate_step(model, truth, k, rng);
    const Vector z = model.observation() * truth +
                     r.cwiseSqrt() * rng.standard_normal(2, 1).col(0);
    StepResult res = step(ensemble, model, k, active, z, cfg, comp, filter_rng);
    total += res.report.nis;
    ensemble = std::move(res.analysis);
    comp = res.comp;
  }
  const double mean_nis = total / steps;
  const double m = static_cast<double>(active.size());
  Outcome out;
  out.name = "NIS consistency";
  out.measured = std::abs(mean_nis - m) / m;
  out.threshold = 0.2;
  out.passed = out.measured <= 0.2;
  out.detail = "time-averaged NIS " + fmt(mean_nis) + " over " + std::to_string(steps) +
               " steps (m = " + fmt(m) + ")";
  return out;
}

Outcome initial_mean_error(int seeds, Index ensemble, std::uint64_t seed) {
  const Lorenz96Model model;
  double sum_sq = 0.0;
  long count = 0;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t rs = run_seed(seed, static_cast<std::uint64_t>(s));
    GaussianSampler truth_rng = GaussianSampler::for_stream(rs, Stream::Truth);
    const Vector truth0 = model.sample_initial_truth(truth_rng);
    GaussianSampler init = GaussianSampler::for_stream(rs, Stream::InitialEnsemble);
    const Ensemble e = make_initial_ensemble(model, truth0, ensemble, init);
    const Vector err = e.members().rowwise().mean() - truth0;
    sum_sq += err.squaredNorm();
    count += err.size();
  }
  const double sd = std::sqrt(sum_sq / static_cast<double>(count));
  const double expected = 1.0 / std::sqrt(static_cast<double>(ensemble));
  Outcome out;
  out.name = "initial ensemble-mean error";
  out.measured = std::abs(sd / expected - 1.0);
  out.threshold = 0.2;
  out.passed = out.measured <= 0.2;
  out.detail = "pooled error std " + fmt(sd) + " vs 1/sqrt(N) = " + fmt(expected) + " over " +
               std::to_string(seeds) + " seeds";
  return out;
}

Outcome rk4_order() {
  GaussianSampler rng(7);
  Vector x0 = Vector::Constant(40, 8.0) + rng.standard_normal(40, 1);
  for (int k = 0; k < 1000; ++k) x0 = rk4_step(x0, 0.05);

  const double horizon = 0.5;
  auto integrate = [&](double dt) {
    Vector x = x0;
    const int n = static_cast<int>(std::lround(horizon / dt));
    for (int k = 0; k < n; ++k) x = rk4_step(x, dt);
    return x;
  };
  const Vector reference = integrate(0.0125 / 64.0);
  const double e1 = (integrate(0.05) - reference).norm();
  const double e2 = (integrate(0.025) - reference).norm();
  const double e3 = (integrate(0.0125) - reference).norm();
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  Outcome out;
  out.name = "RK4 convergence order";
  out.measured = order;
  out.threshold = 3.9;
  out.passed = order >= 3.9;
  out.detail = "errors " + fmt(e1) + ", " + fmt(e2) + ", " + fmt(e3) + "; observed order " +
               fmt(order);
  return out;
}

}  // namespace carenkf::oracles

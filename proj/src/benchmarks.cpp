#include "carenkf/benchmarks.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "carenkf/errors.hpp"

namespace carenkf {

// ---------------------------------------------------------------------------
// SLAM

SlamParams SlamParams::with_noise_scale(double s) {
  SlamParams p;
  p.sigma_range *= s;
  p.sigma_bearing *= s;
  return p;
}

SlamModel::SlamModel(SlamParams params) : params_(params) {
  if (params_.landmarks < 1 || params_.period < 1) {
    throw std::invalid_argument("SlamModel: landmarks and period must be positive");
  }
  noise_factor_ = Matrix::Zero(state_dim(), 3);
  noise_factor_(0, 0) = params_.process_std_x;
  noise_factor_(1, 1) = params_.process_std_y;
  noise_factor_(2, 2) = params_.process_std_theta;
}

Vector SlamModel::advance(const Vector& x, int /*step*/) const {
  Vector out = x;
  const double alpha = params_.turn_rate();
  const double heading = x(2) + alpha;
  out(0) += params_.dt * params_.speed * std::cos(heading);
  out(1) += params_.dt * params_.speed * std::sin(heading);
  out(2) += alpha;
  return out;
}

Vector SlamModel::start_pose() const {
  // The noise-free walk visits the vertices of a regular polygon with side
  // dt*v and exterior angle alpha; place its centre at the origin.
  const double alpha = params_.turn_rate();
  const double half_side = 0.5 * params_.dt * params_.speed;
  const double apothem = half_side / std::tan(0.5 * alpha);
  Vector pose(3);
  pose(0) = -(half_side * std::cos(alpha) - apothem * std::sin(alpha));
  pose(1) = -(half_side * std::sin(alpha) + apothem * std::cos(alpha));
  pose(2) = 0.0;
  return pose;
}

namespace {

double landmark_range(const Vector& x, int j) {
  const double dx = x(3 + 2 * j) - x(0);
  const double dy = x(4 + 2 * j) - x(1);
  return std::hypot(dx, dy);
}

double landmark_bearing(const Vector& x, int j) {
  const double dx = x(3 + 2 * j) - x(0);
  const double dy = x(4 + 2 * j) - x(1);
  return wrap_angle(std::atan2(dy, dx) - x(2));
}

double slam_component(const Vector& x, Index component) {
  const int j = static_cast<int>(component / 2);
  return component % 2 == 0 ? landmark_range(x, j) : landmark_bearing(x, j);
}

}  // namespace

Vector slam_measure(const Vector& x, const std::vector<int>& landmarks) {
  Vector z(2 * static_cast<Index>(landmarks.size()));
  for (std::size_t k = 0; k < landmarks.size(); ++k) {
    z(2 * static_cast<Index>(k)) = landmark_range(x, landmarks[k]);
    z(2 * static_cast<Index>(k) + 1) = landmark_bearing(x, landmarks[k]);
  }
  return z;
}

Vector SlamModel::measure(const Vector& x, const ActiveSet& active) const {
  Vector z(static_cast<Index>(active.size()));
  for (std::size_t r = 0; r < active.size(); ++r) {
    z(static_cast<Index>(r)) = slam_component(x, active[r]);
  }
  return z;
}

MeasurementMap SlamModel::measurement(const ActiveSet& active) const {
  MeasurementMap h;
  h.angular.reserve(active.size());
  for (const Index c : active) {
    if (c < 0 || c >= 2 * params_.landmarks) {
      throw std::out_of_range("SlamModel: measurement component out of range");
    }
    h.angular.push_back(c % 2 == 1);
  }
  h.eval = [this, active](const Vector& x) { return measure(x, active); };
  return h;
}

Matrix SlamModel::measurement_noise(const ActiveSet& active) const {
  Vector var(static_cast<Index>(active.size()));
  for (std::size_t r = 0; r < active.size(); ++r) {
    const double sigma = active[r] % 2 == 0 ? params_.sigma_range : params_.sigma_bearing;
    var(static_cast<Index>(r)) = sigma * sigma;
  }
  return var.asDiagonal();
}

std::vector<Index> SlamModel::metric_indices() const {
  std::vector<Index> idx{0, 1};
  for (Index i = 3; i < state_dim(); ++i) {
    idx.push_back(i);
  }
  return idx;
}

Vector SlamModel::sample_initial_truth(GaussianSampler& sampler) const {
  Vector x(state_dim());
  x.head<3>() = start_pose();
  const double w = params_.world_half_width;
  for (Index i = 3; i < state_dim(); ++i) {
    x(i) = sampler.uniform(-w, w);
  }
  return x;
}

Vector SlamModel::prior_stddev() const {
  Vector sd = Vector::Constant(state_dim(), params_.landmark_prior_std);
  sd(0) = params_.pose_prior_std_xy;
  sd(1) = params_.pose_prior_std_xy;
  sd(2) = params_.pose_prior_std_theta;
  return sd;
}

std::vector<int> SlamModel::visible_landmarks(const Vector& truth) const {
  std::vector<int> seen;
  for (int j = 0; j < params_.landmarks; ++j) {
    if (landmark_range(truth, j) <= params_.sensor_range) {
      seen.push_back(j);
    }
  }
  return seen;
}

ActiveSet SlamModel::components_of(const std::vector<int>& landmarks) {
  ActiveSet active;
  active.reserve(2 * landmarks.size());
  for (const int j : landmarks) {
    active.push_back(2 * static_cast<Index>(j));
    active.push_back(2 * static_cast<Index>(j) + 1);
  }
  return active;
}

ActiveSet SlamModel::visible(const Vector& truth) const {
  return components_of(visible_landmarks(truth));
}

// ---------------------------------------------------------------------------
// Lorenz-96

Lorenz96Params Lorenz96Params::with_noise_scale(double s) {
  Lorenz96Params p;
  p.sigma_obs *= s;
  return p;
}

Lorenz96Model::Lorenz96Model(Lorenz96Params params)
    : params_(params), noise_factor_(params.dim, 0) {
  if (params_.dim < 4 || params_.dim % 2 != 0) {
    throw std::invalid_argument("Lorenz96Model: dimension must be even and at least 4");
  }
}

Vector lorenz96_rhs(const Vector& x, double forcing) {
  const Index n = x.size();
  Vector dx(n);
  for (Index i = 0; i < n; ++i) {
    const Index ip1 = (i + 1) % n;
    const Index im1 = (i + n - 1) % n;
    const Index im2 = (i + n - 2) % n;
    dx(i) = (x(ip1) - x(im2)) * x(im1) - x(i) + forcing;
  }
  return dx;
}

Vector rk4_step(const Vector& x, double dt, double forcing) {
  const Vector k1 = lorenz96_rhs(x, forcing);
  const Vector k2 = lorenz96_rhs(x + 0.5 * dt * k1, forcing);
  const Vector k3 = lorenz96_rhs(x + 0.5 * dt * k2, forcing);
  const Vector k4 = lorenz96_rhs(x + dt * k3, forcing);
  Vector out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw NonFiniteState("rk4_step: Lorenz-96 state blew up");
  }
  return out;
}

Vector lorenz96_measure(const Vector& x) {
  Vector z(x.size() / 2);
  for (Index c = 0; c < z.size(); ++c) {
    z(c) = x(2 * c) * x(2 * c);
  }
  return z;
}

Vector Lorenz96Model::advance(const Vector& x, int /*step*/) const {
  return rk4_step(x, params_.dt, params_.forcing);
}

Vector Lorenz96Model::measure(const Vector& x, const ActiveSet& active) const {
  Vector z(static_cast<Index>(active.size()));
  for (std::size_t r = 0; r < active.size(); ++r) {
    const double v = x(2 * active[r]);
    z(static_cast<Index>(r)) = v * v;
  }
  return z;
}

MeasurementMap Lorenz96Model::measurement(const ActiveSet& active) const {
  for (const Index c : active) {
    if (c < 0 || c >= params_.dim / 2) {
      throw std::out_of_range("Lorenz96Model: measurement component out of range");
    }
  }
  return MeasurementMap::plain(static_cast<Index>(active.size()),
                               [this, active](const Vector& x) { return measure(x, active); });
}

Matrix Lorenz96Model::measurement_noise(const ActiveSet& active) const {
  const auto m = static_cast<Index>(active.size());
  return Matrix::Identity(m, m) * (params_.sigma_obs * params_.sigma_obs);
}

std::vector<Index> Lorenz96Model::metric_indices() const {
  std::vector<Index> idx(static_cast<std::size_t>(params_.dim));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

Vector Lorenz96Model::sample_initial_truth(GaussianSampler& sampler) const {
  Vector x = Vector::Constant(params_.dim, params_.forcing) + sampler.standard_normal(params_.dim, 1);
  for (int k = 0; k < params_.spin_up; ++k) {
    x = rk4_step(x, params_.dt, params_.forcing);
  }
  return x;
}

Vector Lorenz96Model::prior_stddev() const { return Vector::Ones(params_.dim); }

ActiveSet Lorenz96Model::visible(const Vector& /*truth*/) const {
  ActiveSet all(static_cast<std::size_t>(params_.dim / 2));
  std::iota(all.begin(), all.end(), Index{0});
  return all;
}

// ---------------------------------------------------------------------------

Vector simulate_step(const SystemModel& model, const Vector& x, int step, GaussianSampler& sampler) {
  Vector next = model.advance(x, step);
  const Matrix& factor = model.process_noise_factor();
  if (factor.cols() > 0) {
    next += factor * sampler.standard_normal(factor.cols(), 1);
  }
  return next;
}

TruthTrajectory make_truth(const BenchmarkModel& model, std::uint64_t run_seed, int steps) {
  if (steps < 1) {
    throw std::invalid_argument("make_truth: steps must be >= 1");
  }
  GaussianSampler sampler = GaussianSampler::for_stream(run_seed, Stream::Truth);
  TruthTrajectory truth;
  truth.initial = model.sample_initial_truth(sampler);
  Vector x = truth.initial;
  for (int k = 1; k <= steps; ++k) {
    x = simulate_step(model, x, k - 1, sampler);
    if (!x.allFinite()) {
      throw NonFiniteState("make_truth: non-finite truth at step " + std::to_string(k));
    }
    ActiveSet active = model.visible(x);
    Vector z = model.measure(x, active);
    if (!active.empty()) {
      const MeasurementMap h = model.measurement(active);
      z += sample_gaussian(sampler, model.measurement_noise(active), 1).col(0);
      for (Index r = 0; r < z.size(); ++r) {
        if (h.angular[static_cast<std::size_t>(r)]) {
          z(r) = wrap_angle(z(r));
        }
      }
    }
    truth.states.push_back(x);
    truth.active.push_back(std::move(active));
    truth.observations.push_back(std::move(z));
  }
  return truth;
}

Ensemble make_initial_ensemble(const BenchmarkModel& model, const Vector& truth0, Index size,
                               GaussianSampler& sampler) {
  if (size < 2) {
    throw std::invalid_argument("make_initial_ensemble: ensemble size must be >= 2");
  }
  const Vector sd = model.prior_stddev();
  Matrix members = sd.asDiagonal() * sampler.standard_normal(truth0.size(), size);
  members.colwise() += truth0;
  return Ensemble(std::move(members));
}

}  // namespace carenkf

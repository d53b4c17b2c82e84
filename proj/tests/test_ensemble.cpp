#include <doctest.h>

#include <cmath>
#include <limits>

#include "carenkf/benchmarks.hpp"
#include "carenkf/ensemble.hpp"
#include "carenkf/errors.hpp"
#include "carenkf/random.hpp"
#include "carenkf/system_model.hpp"

using namespace carenkf;

namespace {

Ensemble scalar_ensemble(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index i = 0;
  for (const double v : values) m(0, i++) = v;
  return Ensemble(m);
}

}  // namespace

TEST_CASE("ensemble construction validates shape and finiteness") {
  CHECK_THROWS(Ensemble{Matrix::Zero(3, 1)});
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Ensemble{bad}, NonFiniteState);
}

TEST_CASE("stats on hand examples") {
  Vector c(2);
  c << 1.5, -3.0;
  const EnsembleStats flat = stats(Ensemble(c.replicate(1, 4)));
  CHECK(flat.mean.isApprox(c));
  CHECK(flat.anomalies.isZero(0.0));

  const EnsembleStats s = stats(scalar_ensemble({0.0, 2.0}));
  CHECK(s.mean(0) == 1.0);
  CHECK(s.anomalies(0, 0) == -1.0);
  CHECK(s.anomalies(0, 1) == 1.0);
  CHECK(s.sample_cov()(0, 0) == doctest::Approx(2.0));
  CHECK(s.trace_cov() == doctest::Approx(2.0));
}

TEST_CASE("stats mean matches a brute-force column average") {
  GaussianSampler g(21);
  const Matrix x = g.standard_normal(3, 5);
  const EnsembleStats s = stats(Ensemble(x));
  for (Index r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (Index c = 0; c < 5; ++c) sum += x(r, c);
    CHECK(s.mean(r) == doctest::Approx(sum / 5.0));
  }
  CHECK(s.anomalies.rowwise().sum().norm() < 1e-14);
  CHECK(s.trace_cov() == doctest::Approx(s.sample_cov().trace()));
}

TEST_CASE("inflate scales anomalies by sqrt(rho)") {
  GaussianSampler g(4);
  const Ensemble e(g.standard_normal(4, 10));
  CHECK(inflate(e, 1.0).members() == e.members());

  const double before = stats(e).trace_cov();
  const EnsembleStats after = stats(inflate(e, 1.05));
  CHECK(std::abs(after.trace_cov() / before - 1.05) < 1e-12);
  CHECK((after.mean - stats(e).mean).norm() < 1e-14);

  const EnsembleStats one = stats(inflate(scalar_ensemble({0.0, 2.0}), 1.05));
  CHECK(one.anomalies(0, 1) == doctest::Approx(std::sqrt(1.05)));

  CHECK_THROWS_AS(inflate(e, 0.99), InvalidRho);
}

TEST_CASE("propagate through identity, doubling, and Lorenz equilibrium") {
  GaussianSampler g(9);
  const Ensemble e(g.standard_normal(2, 6));
  const LinearGaussianModel identity(Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                                     Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(propagate(e, identity, 1, g).members() == e.members());

  const LinearGaussianModel doubling(2.0 * Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                     Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  const Ensemble out = propagate(scalar_ensemble({1.0, 1.0}), doubling, 1, g);
  CHECK(out.members()(0, 0) == 2.0);

  const Lorenz96Model l96;
  const Ensemble rest(Matrix::Constant(40, 3, 8.0));
  CHECK((propagate(rest, l96, 1, g).members() - rest.members()).norm() < 1e-12);
}

TEST_CASE("propagate adds process noise with the model covariance") {
  Matrix q(2, 2);
  q << 0.5, 0.1, 0.1, 0.2;
  const LinearGaussianModel model(Matrix::Identity(2, 2), q, Matrix::Identity(2, 2),
                                  Matrix::Identity(2, 2));
  GaussianSampler g(10);
  const Ensemble e(Matrix::Zero(2, 100000));
  const Matrix cov = stats(propagate(e, model, 1, g)).sample_cov();
  CHECK((cov - q).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("recenter moves the mean and keeps anomalies") {
  const Ensemble e = scalar_ensemble({0.0, 2.0});
  Vector five(1);
  five << 5.0;
  const Ensemble moved = recenter(e, five);
  CHECK(moved.members()(0, 0) == 4.0);
  CHECK(moved.members()(0, 1) == 6.0);
  CHECK(recenter(e, stats(e).mean).members() == e.members());

  GaussianSampler g(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Ensemble r(g.standard_normal(5, 8));
    const Vector target = g.standard_normal(5, 1);
    const EnsembleStats s = stats(recenter(r, target));
    CHECK((s.mean - target).norm() < 1e-13);
    CHECK((s.anomalies - stats(r).anomalies).norm() < 1e-13);
  }
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "carenkf/errors.hpp"
#include "carenkf/linalg.hpp"
#include "carenkf/random.hpp"
#include "test_util.hpp"

using namespace carenkf;
using carenkf::testing::rel_fro;
using carenkf::testing::sample_cov_of;

TEST_CASE("spd_solve on identity and diagonal systems") {
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  CHECK(rel_fro(spd_solve(Matrix::Identity(3, 3), b), b) < 1e-15);

  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 2.0, 4.0;
  Vector rhs(2);
  rhs << 2.0, 4.0;
  const Matrix x = spd_solve(a, rhs);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("spd_solve residual on random SPD systems") {
  GaussianSampler s(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = carenkf::testing::random_spd(s, 8);
    const Matrix b = s.standard_normal(8, 3);
    const Matrix x = spd_solve(a, b);
    CHECK(rel_fro(a * x, b) < 1e-10);
  }
}

TEST_CASE("spd_solve rejects indefinite and non-finite input") {
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = -1.0;
  CHECK_THROWS_AS(spd_solve(a, Vector::Ones(2)), NotPositiveDefinite);
  a(1, 1) = std::nan("");
  CHECK_THROWS_AS(spd_solve(a, Vector::Ones(2)), NumericalError);
}

TEST_CASE("sym_sqrt_psd") {
  CHECK(rel_fro(sym_sqrt_psd(Matrix::Identity(3, 3)), Matrix::Identity(3, 3)) < 1e-14);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4.0, 9.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 2.0, 3.0;
  CHECK(rel_fro(sym_sqrt_psd(d), expected) < 1e-14);

  GaussianSampler s(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = s.standard_normal(6, 10);
    const Matrix a = m * m.transpose();
    const Matrix root = sym_sqrt_psd(a);
    CHECK(rel_fro(root * root, a) < 1e-8);
    CHECK((root - root.transpose()).norm() < 1e-12 * root.norm());
  }

  // rank deficient input keeps working, the zero eigenvalues stay zero
  const Matrix m = s.standard_normal(5, 2);
  const Matrix low_rank = m * m.transpose();
  const Matrix root = sym_sqrt_psd(low_rank);
  CHECK(rel_fro(root * root, low_rank) < 1e-8);

  Matrix neg = Matrix::Identity(2, 2);
  neg(0, 0) = -1.0;
  CHECK_THROWS_AS(sym_sqrt_psd(neg), NotPsd);
}

TEST_CASE("sample_gaussian moments and determinism") {
  GaussianSampler zero(1);
  CHECK(sample_gaussian(zero, Matrix::Zero(3, 3), 7).isZero(0.0));

  GaussianSampler s(2);
  const Matrix draws = sample_gaussian(s, Matrix::Identity(2, 2), 100000);
  REQUIRE(draws.cols() == 100000);
  const Matrix cov = sample_cov_of(draws);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.05);

  GaussianSampler a(99);
  GaussianSampler b(99);
  Matrix c(2, 2);
  c << 2.0, 0.3, 0.3, 1.0;
  CHECK(sample_gaussian(a, c, 50) == sample_gaussian(b, c, 50));
}

TEST_CASE("sample_gaussian_rank1 adds the mismatch direction") {
  GaussianSampler s(3);
  Vector d(1);
  d << 1.0;
  const Matrix draws = sample_gaussian_rank1(s, Matrix::Identity(1, 1), 3.0, d, 100000);
  const double var = sample_cov_of(draws)(0, 0);
  CHECK(var >= 3.8);
  CHECK(var <= 4.2);

  // beta = 0 or d = 0 leaves base sampling untouched in law
  Matrix base(2, 2);
  base << 1.0, 0.5, 0.5, 2.0;
  for (const double beta : {0.0, 5.0}) {
    GaussianSampler g(4);
    const Vector dir = beta == 0.0 ? Vector::Ones(2).eval() : Vector::Zero(2).eval();
    const Matrix cov = sample_cov_of(sample_gaussian_rank1(g, base, beta, dir, 100000));
    CHECK((cov - base).cwiseAbs().maxCoeff() <= 0.06);
  }

  GaussianSampler bad(1);
  CHECK_THROWS(sample_gaussian_rank1(bad, base, -1.0, Vector::Ones(2), 3));
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
  CHECK(wrap_angle(2.0 * pi + 0.1) == doctest::Approx(0.1));
  GaussianSampler s(8);
  for (int i = 0; i < 1000; ++i) {
    const double a = s.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::remainder(a - w, 2.0 * pi) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("stream seeds are distinct and reproducible") {
  const auto base = run_seed(20240501, 3);
  CHECK(base == (20240501ULL ^ 3ULL));
  CHECK(stream_seed(base, Stream::Truth) != stream_seed(base, Stream::ProcessNoise));
  CHECK(stream_seed(base, Stream::Truth) == stream_seed(base, Stream::Truth));
  CHECK(stream_seed(run_seed(1, 0), Stream::Truth) != stream_seed(run_seed(1, 1), Stream::Truth));
}

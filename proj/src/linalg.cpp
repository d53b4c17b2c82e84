#include "carenkf/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "carenkf/errors.hpp"

namespace carenkf {

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("spd_solve: dimension mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw NonFiniteState("spd_solve: non-finite input");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    return llt.solve(b);
  }
  const double scale = a.rows() > 0 ? std::abs(a.trace()) / static_cast<double>(a.rows()) : 0.0;
  for (const double factor : {1e-12, 1e-10, 1e-8}) {
    Matrix loaded = a;
    loaded.diagonal().array() += factor * scale;
    llt.compute(loaded);
    if (llt.info() == Eigen::Success) {
      return llt.solve(b);
    }
  }
  throw NotPositiveDefinite("spd_solve: Cholesky failed after jitter escalation (dim " +
                            std::to_string(a.rows()) + ")");
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix sym_sqrt_psd(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("sym_sqrt_psd: matrix is not square");
  }
  if (a.size() == 0) {
    return a;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("sym_sqrt_psd: eigendecomposition did not converge");
  }
  Vector lambda = eig.eigenvalues();
  const double largest = lambda.cwiseAbs().maxCoeff();
  const double floor = -1e-8 * largest;
  if (lambda.minCoeff() < floor) {
    throw NotPsd("sym_sqrt_psd: eigenvalue " + std::to_string(lambda.minCoeff()) +
                 " below tolerance " + std::to_string(floor));
  }
  const Vector root = lambda.cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  return v * root.asDiagonal() * v.transpose();
}

Matrix sample_gaussian(GaussianSampler& sampler, const Matrix& cov, Index count) {
  const Matrix root = sym_sqrt_psd(cov);
  return root * sampler.standard_normal(cov.rows(), count);
}

Matrix sample_gaussian_rank1(GaussianSampler& sampler, const Matrix& base, double beta,
                             const Vector& d, Index count) {
  if (beta < 0.0) {
    throw std::invalid_argument("sample_gaussian_rank1: beta must be nonnegative");
  }
  if (d.size() != base.rows()) {
    throw std::invalid_argument("sample_gaussian_rank1: mismatch vector has wrong size");
  }
  Matrix eta = sample_gaussian(sampler, base, count);
  const Matrix xi = sampler.standard_normal(1, count);
  eta.noalias() += std::sqrt(beta) * d * xi;
  return eta;
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + pi, two_pi);
  if (wrapped < 0.0) {
    wrapped += two_pi;
  }
  wrapped -= pi;
  // fmod maps +pi to -pi; the range is (-pi, pi].
  return wrapped == -pi ? pi : wrapped;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace carenkf

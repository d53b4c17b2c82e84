#pragma once

#include <Eigen/Core>

#include "carenkf/random.hpp"

namespace carenkf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Solves A X = B for symmetric positive-definite A by Cholesky. If the plain
/// factorization fails, the diagonal is loaded with 1e-12, 1e-10 and then
/// 1e-8 times trace(A)/dim before giving up with NotPositiveDefinite.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// Symmetric PSD square root by eigendecomposition. Eigenvalues in
/// [-1e-8 max|lambda|, 0) are clamped to zero; anything more negative throws
/// NotPsd. Only the lower triangle of `a` is read.
Matrix sym_sqrt_psd(const Matrix& a);

/// (A + A^T) / 2
Matrix symmetrize(const Matrix& a);

/// `count` i.i.d. columns from N(0, cov).
Matrix sample_gaussian(GaussianSampler& sampler, const Matrix& cov, Index count);

/// `count` i.i.d. columns from N(0, base + beta d d^T), drawn as
/// eta_base + sqrt(beta) xi d with a scalar xi ~ N(0, 1) per column.
Matrix sample_gaussian_rank1(GaussianSampler& sampler, const Matrix& base, double beta,
                             const Vector& d, Index count);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

bool all_finite(const Matrix& m);

}  // namespace carenkf

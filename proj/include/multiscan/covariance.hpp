#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "multiscan/fts.hpp"

namespace multiscan {

// Which estimator a pipeline should use: first differences for independent
// errors, block long-run for weak dependence, pointwise ecdf kernels for
// distributional panels.
enum class CovEstimator { first_difference, block_long_run, ecdf_pointwise };

// Covariance kernel evaluated on the grid: matrix entry (a, b) is C(s_a, s_b).
// Estimates may be slightly indefinite; covariance_root() clamps.
struct CovOperator {
  Eigen::MatrixXd matrix;  // symmetric D x D
};

// Symmetric positive semidefinite square root R with R * R^T equal to the
// positive part of the estimated kernel.  Drawing R * z with z ~ N(0, I)
// gives a Gaussian curve with that covariance.
struct CovRoot {
  Eigen::MatrixXd matrix;  // symmetric PSD, D x D
};

// First-difference estimator:  sum of (X_n - X_{n-1}) outer products over
// n = 2..N, scaled by 1 / (2(N-1)).  Differencing cancels any piecewise
// constant mean except at the (few) change points themselves, so the
// estimate stays consistent under the alternatives the scan targets.
inline CovOperator first_difference_covariance(const FtsSample& sample) {
  const int n = sample.length();
  const int d = sample.dim();
  if (n < 2) throw std::invalid_argument("first_difference_covariance: need at least 2 curves");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < n; ++i) {
    const Eigen::VectorXd diff = (sample.data.row(i) - sample.data.row(i - 1)).transpose();
    acc.noalias() += diff * diff.transpose();
  }
  return CovOperator{acc / (2.0 * (n - 1))};
}

// Long-run variant for dependent errors: average the curves in blocks of
// length `block` (scaled by block^{-1/2}), then apply the first-difference
// estimator to the M = floor(N / block) block sums.  Leftover curves beyond
// the last complete block are dropped.
inline CovOperator block_long_run_covariance(const FtsSample& sample, int block) {
  const int n = sample.length();
  const int d = sample.dim();
  if (block < 1) throw std::invalid_argument("block_long_run_covariance: block must be >= 1");
  const int m = n / block;
  if (m < 2)
    throw std::invalid_argument("block_long_run_covariance: need at least 2 complete blocks");
  Eigen::MatrixXd sums(m, d);
  const double scale = 1.0 / std::sqrt(double(block));
  for (int i = 0; i < m; ++i) {
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(d);
    for (int j = 0; j < block; ++j) s += sample.data.row(i * block + j);
    sums.row(i) = s * scale;
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < m; ++i) {
    const Eigen::VectorXd diff = (sums.row(i) - sums.row(i - 1)).transpose();
    acc.noalias() += diff * diff.transpose();
  }
  return CovOperator{acc / (2.0 * (m - 1))};
}

// Covariance kernel of the scaled empirical process of one panel row:
// C(s, t) = F(min(s, t)) - F(s) F(t), with F the row's empirical cdf
// evaluated on the grid.  No sample-size factor: the row curves are already
// scaled by sqrt(M), which is exactly what makes this the matching kernel.
inline CovOperator ecdf_covariance(const Eigen::VectorXd& ecdf) {
  const auto d = ecdf.size();
  if (d < 1) throw std::invalid_argument("ecdf_covariance: empty cdf");
  for (Eigen::Index a = 0; a < d; ++a) {
    if (!(ecdf[a] >= 0.0 && ecdf[a] <= 1.0))
      throw std::invalid_argument("ecdf_covariance: cdf values must lie in [0, 1]");
    if (a > 0 && ecdf[a] < ecdf[a - 1])
      throw std::invalid_argument("ecdf_covariance: cdf must be nondecreasing");
  }
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = ecdf[b] - ecdf[a] * ecdf[b];  // b <= a, so min is b
      c(a, b) = v;
      c(b, a) = v;
    }
  return CovOperator{c};
}

// Symmetric PSD root via eigendecomposition with negative eigenvalues
// clamped to zero.  Estimated kernels can dip below zero in the tail of the
// spectrum; clamping is the standard repair and changes nothing when the
// input is already PSD.
inline CovRoot covariance_root(const CovOperator& op) {
  const auto& c = op.matrix;
  if (c.rows() != c.cols()) throw std::invalid_argument("covariance_root: matrix not square");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (((c - c.transpose()).cwiseAbs().maxCoeff()) > 1e-8 * scale)
    throw std::invalid_argument("covariance_root: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (c + c.transpose()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("covariance_root: eigendecomposition failed");
  const Eigen::VectorXd clamped = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return CovRoot{solver.eigenvectors() * clamped.asDiagonal() *
                 solver.eigenvectors().transpose()};
}

}  // namespace multiscan

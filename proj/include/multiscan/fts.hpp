#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace multiscan {

// Discretization of the function domain: evaluation points plus quadrature
// weights, so that integrals reduce to weighted dot products.  The default
// unit grid uses left Riemann points j/D with uniform weights 1/D.
struct Grid {
  Eigen::VectorXd points;        // strictly increasing
  Eigen::VectorXd quad_weights;  // nonnegative, same length

  int size() const { return static_cast<int>(points.size()); }

  static Grid uniform01(int d) {
    if (d < 1) throw std::invalid_argument("grid: need at least one point");
    Grid g;
    g.points = Eigen::VectorXd::LinSpaced(d, 0.0, double(d - 1) / d);
    g.quad_weights = Eigen::VectorXd::Constant(d, 1.0 / d);
    return g;
  }
};

inline Grid make_grid(Eigen::VectorXd points, Eigen::VectorXd quad_weights) {
  const auto d = points.size();
  if (d < 1) throw std::invalid_argument("grid: need at least one point");
  if (quad_weights.size() != d)
    throw std::invalid_argument("grid: points and quadrature weights differ in length");
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!std::isfinite(points[j]) || !std::isfinite(quad_weights[j]))
      throw std::invalid_argument("grid: entries must be finite");
    if (quad_weights[j] < 0.0)
      throw std::invalid_argument("grid: quadrature weights must be nonnegative");
    if (j > 0 && points[j] <= points[j - 1])
      throw std::invalid_argument("grid: points must be strictly increasing");
  }
  return Grid{std::move(points), std::move(quad_weights)};
}

// Trapezoid-rule weights for an arbitrary strictly increasing point set.
// Used when a curve file carries its own grid coordinates in a header row.
inline Grid trapezoid_grid(Eigen::VectorXd points) {
  const auto d = points.size();
  Eigen::VectorXd w(d);
  if (d == 1) {
    w[0] = 1.0;
  } else {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double left = (j > 0) ? points[j - 1] : points[0];
      const double right = (j + 1 < d) ? points[j + 1] : points[d - 1];
      w[j] = 0.5 * (right - left);
    }
  }
  return make_grid(std::move(points), std::move(w));
}

// L2 norm with respect to the grid's quadrature weights:
// sqrt(sum_d c_d^2 * qw_d).
inline double weighted_l2_norm(const Eigen::VectorXd& c, const Grid& grid) {
  if (c.size() != grid.points.size())
    throw std::invalid_argument("norm: curve length does not match grid");
  return std::sqrt(c.cwiseAbs2().dot(grid.quad_weights));
}

// A functional time series sample: N curves, each observed on a common grid.
// Row n-1 of `data` holds curve X_n (1-based time index throughout).
struct FtsSample {
  Grid grid;
  Eigen::MatrixXd data;  // N x D

  int length() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

inline FtsSample make_sample(Grid grid, Eigen::MatrixXd data) {
  if (data.rows() < 1) throw std::invalid_argument("sample: need at least one curve");
  if (data.cols() != grid.points.size())
    throw std::invalid_argument("sample: curve length does not match grid");
  if (!data.allFinite()) throw std::invalid_argument("sample: entries must be finite");
  return FtsSample{std::move(grid), std::move(data)};
}

// Cumulative row sums with a leading zero row, so any inclusive segment sum
// S_i^j = sum_{l=i}^{j} X_l (1-based) is one row subtraction.
struct PrefixSums {
  Eigen::MatrixXd cumulative;  // (N+1) x D, row 0 is zero

  int length() const { return static_cast<int>(cumulative.rows()) - 1; }
  int dim() const { return static_cast<int>(cumulative.cols()); }
};

inline PrefixSums build_prefix_sums(const FtsSample& sample) {
  const int n = sample.length();
  const int d = sample.dim();
  PrefixSums ps;
  ps.cumulative.resize(n + 1, d);
  ps.cumulative.row(0).setZero();
  for (int i = 0; i < n; ++i)
    ps.cumulative.row(i + 1) = ps.cumulative.row(i) + sample.data.row(i);
  return ps;
}

inline Eigen::VectorXd segment_sum(const PrefixSums& ps, int i, int j) {
  if (i < 1 || j > ps.length() || i > j)
    throw std::invalid_argument("segment_sum: need 1 <= i <= j <= N");
  return (ps.cumulative.row(j) - ps.cumulative.row(i - 1)).transpose();
}

}  // namespace multiscan

#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

namespace multiscan {

namespace detail {

// Knot vector for the simulation basis: cubic (order 4) splines on [0, 1]
// with nine equally spaced interior knots and clamped ends, giving 13 basis
// functions.
inline const std::array<double, 17>& bspline_knots() {
  static const std::array<double, 17> knots = [] {
    std::array<double, 17> t{};
    for (int i = 0; i < 4; ++i) t[i] = 0.0;
    for (int i = 1; i <= 9; ++i) t[3 + i] = i / 10.0;
    for (int i = 13; i < 17; ++i) t[i] = 1.0;
    return t;
  }();
  return knots;
}

}  // namespace detail

inline constexpr int kBsplineCount = 13;

// Evaluate the 13 cubic B-spline basis functions at each point; row p of the
// result holds (phi_1(x_p), ..., phi_13(x_p)).  Points must lie in [0, 1].
// Uses the local de Boor triangle: find the knot span, then build the four
// nonzero basis values in place.
inline Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& points) {
  const auto& t = detail::bspline_knots();
  constexpr int degree = 3;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(points.size(), kBsplineCount);
  for (Eigen::Index p = 0; p < points.size(); ++p) {
    const double x = points[p];
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("bspline_basis: points must lie in [0, 1]");
    // Span index i with t[i] <= x < t[i+1]; x = 1 falls in the last
    // nonempty span, where the final basis function reaches 1.
    int span = degree;
    while (span < kBsplineCount - 1 && x >= t[span + 1]) ++span;

    double vals[degree + 1] = {1.0, 0.0, 0.0, 0.0};
    double left[degree + 1];
    double right[degree + 1];
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - t[span + 1 - j];
      right[j] = t[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double tmp = vals[r] / (right[r + 1] + left[j - r]);
        vals[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      vals[j] = saved;
    }
    for (int r = 0; r <= degree; ++r) basis(p, span - degree + r) = vals[r];
  }
  return basis;
}

}  // namespace multiscan

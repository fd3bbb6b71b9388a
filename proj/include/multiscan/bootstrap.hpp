#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "multiscan/covariance.hpp"
#include "multiscan/fts.hpp"
#include "multiscan/index_set.hpp"
#include "multiscan/parallel.hpp"
#include "multiscan/rng.hpp"
#include "multiscan/scan.hpp"

namespace multiscan {

struct BootstrapConfig {
  int replicates = 1000;     // B
  double alpha = 0.05;       // nominal level; threshold is the (1-alpha) quantile
  std::uint64_t seed = 0;    // base seed; replicate b uses substream (seed, b)
  unsigned threads = 0;      // 0 = default_thread_count()
};

struct ThresholdResult {
  double threshold = 0.0;
  std::vector<double> replicate_stats;  // sup statistic per replicate, in replicate order
};

// Order statistic with index ceil((1 - alpha) * B), 1-based, on the sorted
// replicate sups.  The tiny downward nudge keeps ceil() from jumping one
// rank up when (1 - alpha) * B is an integer that floating point rounds
// upward (e.g. B = 100, alpha = 0.05 must give rank 95, not 96).
inline double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("empirical_quantile: alpha must lie in (0, 1)");
  const auto b = values.size();
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * double(b) - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > b) rank = b;
  std::sort(values.begin(), values.end());
  return values[rank - 1];
}

namespace detail {

// Shared bootstrap loop.  `root_at(n)` supplies the covariance root used for
// time point n (0-based); the stationary and panel variants differ only
// there.  Replicate b draws its Gaussian surrogate series from substream
// (seed, b+1) in row order, so output is independent of the thread count and
// the two variants coincide bit-for-bit when all roots are equal.
template <typename RootAt>
ThresholdResult bootstrap_threshold_core(RootAt&& root_at, int n_total, const Grid& grid,
                                         const ScanIndexSet& set, const WeightFunction& rho,
                                         const BootstrapConfig& cfg) {
  if (cfg.replicates < 1)
    throw std::invalid_argument("bootstrap: need at least one replicate");
  if (set.series_length != n_total)
    throw std::invalid_argument("bootstrap: index set built for a different series length");
  const int d = grid.size();

  ThresholdResult result;
  result.replicate_stats.resize(cfg.replicates);
  parallel_for(
      static_cast<std::size_t>(cfg.replicates),
      [&](std::size_t b) {
        RngStream stream(mix_key(cfg.seed, static_cast<std::uint64_t>(b) + 1));
        Eigen::MatrixXd surrogate(n_total, d);
        for (int n = 0; n < n_total; ++n)
          surrogate.row(n) = (root_at(n) * stream.normal_vector(d)).transpose();
        PrefixSums ps;
        ps.cumulative.resize(n_total + 1, d);
        ps.cumulative.row(0).setZero();
        for (int n = 0; n < n_total; ++n)
          ps.cumulative.row(n + 1) = ps.cumulative.row(n) + surrogate.row(n);
        result.replicate_stats[b] = max_scan_statistic(ps, grid, set, rho);
      },
      cfg.threads);

  result.threshold = empirical_quantile(result.replicate_stats, cfg.alpha);
  return result;
}

}  // namespace detail

// Threshold for a stationary error sequence: one covariance root for the
// whole series.
inline ThresholdResult bootstrap_threshold(const CovRoot& root, int n_total, const Grid& grid,
                                           const ScanIndexSet& set, const WeightFunction& rho,
                                           const BootstrapConfig& cfg) {
  if (root.matrix.rows() != grid.size() || root.matrix.cols() != grid.size())
    throw std::invalid_argument("bootstrap: root dimension does not match grid");
  return detail::bootstrap_threshold_core([&](int) -> const Eigen::MatrixXd& { return root.matrix; },
                                          n_total, grid, set, rho, cfg);
}

// Threshold with one covariance root per time point, as produced by the
// per-row empirical-cdf kernels of a distributional panel.
inline ThresholdResult bootstrap_threshold_panel(const std::vector<CovRoot>& roots,
                                                 const Grid& grid, const ScanIndexSet& set,
                                                 const WeightFunction& rho,
                                                 const BootstrapConfig& cfg) {
  if (roots.empty()) throw std::invalid_argument("bootstrap: no covariance roots");
  for (const CovRoot& r : roots)
    if (r.matrix.rows() != grid.size() || r.matrix.cols() != grid.size())
      throw std::invalid_argument("bootstrap: root dimension does not match grid");
  return detail::bootstrap_threshold_core(
      [&](int n) -> const Eigen::MatrixXd& { return roots[static_cast<std::size_t>(n)].matrix; },
      static_cast<int>(roots.size()), grid, set, rho, cfg);
}

}  // namespace multiscan

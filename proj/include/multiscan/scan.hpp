#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "multiscan/fts.hpp"
#include "multiscan/index_set.hpp"
#include "multiscan/weights.hpp"

namespace multiscan {

// Weighted two-window scan statistic at pair (n, h):
//
//   || S(n-h+1, n) - S(n+1, n+h) ||_grid / (sqrt(N) * rho(h / N))
//
// where S(i, j) is the inclusive segment sum of the curves.  Large values
// mean the local means of the two adjacent windows disagree at that scale.
inline double scan_statistic(const PrefixSums& ps, const Grid& grid, const ScanPair& p,
                             const WeightFunction& rho) {
  const int n_total = ps.length();
  if (p.half_width < 1 || p.lo() < 1 || p.hi() > n_total)
    throw std::invalid_argument("scan_statistic: pair does not fit the series");
  const Eigen::VectorXd diff =
      segment_sum(ps, p.lo(), p.center) - segment_sum(ps, p.center + 1, p.hi());
  const double scale = std::sqrt(double(n_total)) * rho(double(p.half_width) / n_total);
  return weighted_l2_norm(diff, grid) / scale;
}

inline double scan_statistic(const FtsSample& sample, const ScanPair& p,
                             const WeightFunction& rho) {
  return scan_statistic(build_prefix_sums(sample), sample.grid, p, rho);
}

// Supremum of the scan statistic over an index set; 0 for an empty set.
// This is the bootstrap functional: thresholds are quantiles of its law
// under a no-change Gaussian surrogate.
inline double max_scan_statistic(const PrefixSums& ps, const Grid& grid,
                                 const ScanIndexSet& set, const WeightFunction& rho) {
  double sup = 0.0;
  for (const ScanPair& p : set.pairs) sup = std::max(sup, scan_statistic(ps, grid, p, rho));
  return sup;
}

inline double max_scan_statistic(const FtsSample& sample, const ScanIndexSet& set,
                                 const WeightFunction& rho) {
  return max_scan_statistic(build_prefix_sums(sample), sample.grid, set, rho);
}

// One accepted change point: the refined pair plus its statistic value.
struct Detection {
  ScanPair pair;
  double stat = 0.0;  // scan statistic at `pair`; always above the threshold
};

struct DetectionSet {
  double threshold = 0.0;
  std::vector<Detection> detections;  // in detection order (finest scale first)

  bool empty() const { return detections.empty(); }
  std::size_t size() const { return detections.size(); }
};

// MultiScan: sweep the index set in scan order; at the first pair whose
// statistic exceeds the threshold, refine the center within the triggering
// scale, accept it, drop every pair that is not strictly later in scan order
// or that overlaps the accepted interval, and restart the sweep on the
// survivors.  Stops when a full sweep triggers nothing or no pairs remain.
inline DetectionSet multiscan(const FtsSample& sample, const ScanIndexSet& set,
                              double threshold, const WeightFunction& rho) {
  if (set.series_length != sample.length())
    throw std::invalid_argument("multiscan: index set built for a different series length");
  if (!std::isfinite(threshold) || threshold < 0.0)
    throw std::invalid_argument("multiscan: threshold must be finite and nonnegative");

  const PrefixSums ps = build_prefix_sums(sample);
  const auto stat = [&](const ScanPair& p) { return scan_statistic(ps, sample.grid, p, rho); };

  DetectionSet out;
  out.threshold = threshold;
  ScanIndexSet active = set;
  while (!active.empty()) {
    bool triggered = false;
    for (const ScanPair& p : active.pairs) {
      if (stat(p) <= threshold) continue;
      const ScanPair refined = neighborhood_argmax(active, p, stat);
      out.detections.push_back(Detection{refined, stat(refined)});
      active = eliminate(active, refined);
      triggered = true;
      break;
    }
    if (!triggered) break;
  }
  return out;
}

}  // namespace multiscan

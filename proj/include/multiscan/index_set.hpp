#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <vector>

namespace multiscan {

// A candidate change location paired with a scale.  The pair (center = n,
// half_width = h) compares the segment sums of the adjacent windows
// [n-h+1, n] and [n+1, n+h]; both windows must fit inside 1..N.
struct ScanPair {
  int center = 0;      // last index of the left window
  int half_width = 0;  // window length h >= 1

  int lo() const { return center - half_width + 1; }  // first covered index
  int hi() const { return center + half_width; }      // last covered index

  friend bool operator==(const ScanPair&, const ScanPair&) = default;
};

// Scan order: coarser comparisons come later.  Pairs are ranked by
// half-width first and by center within a half-width, so a full scan visits
// the finest scales first and sweeps left to right within each scale.
inline std::strong_ordering scan_order(const ScanPair& a, const ScanPair& b) {
  if (auto c = a.half_width <=> b.half_width; c != 0) return c;
  return a.center <=> b.center;
}

inline bool scan_before(const ScanPair& a, const ScanPair& b) {
  return scan_order(a, b) == std::strong_ordering::less;
}

// A set of scan pairs for a series of given length, kept sorted in scan
// order.  Construction is via all_scan_pairs / pyramid_scan_pairs below;
// eliminate() produces filtered copies that preserve the sort.
struct ScanIndexSet {
  int series_length = 0;
  std::vector<ScanPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

namespace detail {

/// All centers for one half-width h: n runs over h..N-h (empty when 2h > N).
inline void append_level(std::vector<ScanPair>& out, int n_total, int h) {
  for (int n = h; n + h <= n_total; ++n) out.push_back(ScanPair{n, h});
}

}  // namespace detail

// Exhaustive index set: every admissible (center, half_width) with
// 1 <= n-h+1 and n+h <= N.
inline ScanIndexSet all_scan_pairs(int n_total) {
  if (n_total < 2) throw std::invalid_argument("scan pairs: series length must be at least 2");
  ScanIndexSet set;
  set.series_length = n_total;
  for (int h = 1; 2 * h <= n_total; ++h) detail::append_level(set.pairs, n_total, h);
  return set;
}

// Geometric thinning of the half-widths: only h in {floor(theta^m), m >= 0},
// deduplicated, up to N/2.  Cuts the scan from O(N^2) pairs to O(N log N)
// while keeping every scale within a factor theta of some retained one.
inline ScanIndexSet pyramid_scan_pairs(int n_total, double theta) {
  if (n_total < 2) throw std::invalid_argument("scan pairs: series length must be at least 2");
  if (!(theta > 1.0)) throw std::invalid_argument("scan pairs: theta must exceed 1");
  std::vector<int> levels;
  double power = 1.0;
  for (;;) {
    const int h = static_cast<int>(std::floor(power));
    if (2 * h > n_total) break;
    if (levels.empty() || levels.back() != h) levels.push_back(h);
    power *= theta;
  }
  ScanIndexSet set;
  set.series_length = n_total;
  for (int h : levels) detail::append_level(set.pairs, n_total, h);
  return set;
}

// Pairs that remain scannable after accepting `p` as a detection: everything
// strictly after p in scan order whose covered interval does not intersect
// the interval covered by p.
inline ScanIndexSet eliminate(const ScanIndexSet& set, const ScanPair& p) {
  ScanIndexSet out;
  out.series_length = set.series_length;
  out.pairs.reserve(set.pairs.size());
  for (const ScanPair& q : set.pairs) {
    if (!scan_before(p, q)) continue;
    if (q.hi() < p.lo() || q.lo() > p.hi()) out.pairs.push_back(q);
  }
  return out;
}

// Refine a triggering pair p = (n, h) to the best center at the same scale:
// the argmax of `score` over pairs (n', h) in the set with
// n-h+1 < n' < n+h, ties resolved toward the smallest center.  For h = 1
// that open window contains no integer, so p itself is returned.
template <typename ScoreFn>
ScanPair neighborhood_argmax(const ScanIndexSet& set, const ScanPair& p, ScoreFn&& score) {
  if (!std::binary_search(set.pairs.begin(), set.pairs.end(), p, scan_before))
    throw std::logic_error("neighborhood_argmax: pair is not a member of the index set");
  // The set is sorted in scan order, so the candidates form one contiguous
  // run: locate the (half_width = p.half_width) block, then the center range.
  const ScanPair first_cand{p.lo() + 1, p.half_width};
  auto lo = std::lower_bound(set.pairs.begin(), set.pairs.end(), first_cand, scan_before);
  bool found = false;
  ScanPair best{};
  double best_score = 0.0;
  for (auto it = lo; it != set.pairs.end(); ++it) {
    if (it->half_width != p.half_width || it->center >= p.hi()) break;
    const double s = score(*it);
    if (!found || s > best_score) {
      found = true;
      best = *it;
      best_score = s;
    }
  }
  return found ? best : p;
}

}  // namespace multiscan

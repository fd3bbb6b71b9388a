#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "multiscan/bootstrap.hpp"
#include "multiscan/bspline.hpp"
#include "multiscan/covariance.hpp"
#include "multiscan/fts.hpp"
#include "multiscan/parallel.hpp"
#include "multiscan/rng.hpp"
#include "multiscan/scan.hpp"

namespace multiscan {

// ---------------------------------------------------------------------------
// Error processes on [0, 1]
// ---------------------------------------------------------------------------

// Convenience overload: the 13-spline basis on the default uniform grid.
inline Eigen::MatrixXd bspline_basis(int dim) {
  if (dim < kBsplineCount)
    throw std::invalid_argument("bspline_basis: grid must have at least 13 points");
  return bspline_basis(Grid::uniform01(dim).points);
}

namespace detail {

// Gaussian B-spline curve for time index `key_index` under `seed`: 13
// coefficients from N(0, sigma^2) applied to the precomputed basis.  Each
// time index owns its substream, so generation order never matters.
inline Eigen::VectorXd bspline_noise_curve(const Eigen::MatrixXd& basis, double sigma,
                                           std::uint64_t seed, std::uint64_t key_index) {
  RngStream stream(mix_key(seed, key_index));
  Eigen::VectorXd coef(kBsplineCount);
  for (int m = 0; m < kBsplineCount; ++m) coef[m] = sigma * stream.normal();
  return basis * coef;
}

}  // namespace detail

// i.i.d. errors: independent Gaussian B-spline curves with coefficient
// standard deviation `sigma` (0.1 in the simulation study).
inline FtsSample iid_errors(int n_total, int dim, double sigma, std::uint64_t seed) {
  if (n_total < 1) throw std::invalid_argument("iid_errors: need a positive length");
  if (!(sigma > 0.0)) throw std::invalid_argument("iid_errors: sigma must be positive");
  Grid grid = Grid::uniform01(dim);
  const Eigen::MatrixXd basis = bspline_basis(dim);
  Eigen::MatrixXd data(n_total, dim);
  for (int n = 0; n < n_total; ++n)
    data.row(n) = detail::bspline_noise_curve(basis, sigma, seed, n + 1).transpose();
  return make_sample(std::move(grid), std::move(data));
}

// Functional AR(1) errors: eps_n = Psi(eps_{n-1}) + e_n with i.i.d. B-spline
// innovations e_n and the rank-one kernel psi(tau, s) = kernel_scale * s *
// tau (kernel_scale 1/4 in the study; 0 reduces to iid_errors bit-for-bit,
// which the tests exploit).  The integral is grid quadrature.  A burn-in of
// 50 pre-sample steps starts the chain near stationarity; with operator norm
// about kernel_scale / 3 the initialization bias is far below double
// precision.  Observed innovations use substreams 1..N (matching
// iid_errors); burn-in innovations use substreams N+1..N+burnin.
inline FtsSample far_errors(int n_total, int dim, double sigma, std::uint64_t seed,
                            double kernel_scale = 0.25, int burnin = 50) {
  if (n_total < 1) throw std::invalid_argument("far_errors: need a positive length");
  if (!(sigma > 0.0)) throw std::invalid_argument("far_errors: sigma must be positive");
  if (burnin < 0) throw std::invalid_argument("far_errors: burn-in must be nonnegative");
  Grid grid = Grid::uniform01(dim);
  const Eigen::MatrixXd basis = bspline_basis(dim);
  // Psi(f) = kernel_scale * <s * quad_weight, f> * tau, evaluated pointwise.
  const Eigen::VectorXd inner = grid.points.cwiseProduct(grid.quad_weights);
  const auto apply_kernel = [&](const Eigen::VectorXd& f) -> Eigen::VectorXd {
    return (kernel_scale * inner.dot(f)) * grid.points;
  };
  Eigen::VectorXd state = Eigen::VectorXd::Zero(dim);
  for (int j = 1; j <= burnin; ++j)
    state = apply_kernel(state) +
            detail::bspline_noise_curve(basis, sigma, seed, std::uint64_t(n_total) + j);
  Eigen::MatrixXd data(n_total, dim);
  for (int n = 0; n < n_total; ++n) {
    state = apply_kernel(state) + detail::bspline_noise_curve(basis, sigma, seed, n + 1);
    data.row(n) = state.transpose();
  }
  return make_sample(std::move(grid), std::move(data));
}

// ---------------------------------------------------------------------------
// Mean-change scenarios for curve data
// ---------------------------------------------------------------------------

// Ground truth for a simulated series: change locations c_1 < ... < c_K in
// (0, N) and the K+1 segment means; segment k applies to c_{k-1} < n <= c_k
// with c_0 = 0 and c_{K+1} = N.
struct ChangeSpec {
  int series_length = 0;
  std::vector<int> locations;
  Eigen::MatrixXd segment_means;  // (K+1) x D; row k-1 is the mean of segment k

  int segments() const { return static_cast<int>(segment_means.rows()); }
};

inline ChangeSpec make_change_spec(int series_length, std::vector<int> locations,
                                   Eigen::MatrixXd segment_means) {
  if (series_length < 1) throw std::invalid_argument("change spec: need a positive length");
  for (std::size_t k = 0; k < locations.size(); ++k) {
    if (locations[k] <= 0 || locations[k] >= series_length)
      throw std::invalid_argument("change spec: locations must lie strictly inside 1..N");
    if (k > 0 && locations[k] <= locations[k - 1])
      throw std::invalid_argument("change spec: locations must be strictly increasing");
  }
  if (segment_means.rows() != static_cast<Eigen::Index>(locations.size()) + 1)
    throw std::invalid_argument("change spec: need one mean per segment");
  return ChangeSpec{series_length, std::move(locations), std::move(segment_means)};
}

// Add the piecewise constant signal to an error sample.
inline FtsSample add_segment_means(FtsSample errors, const ChangeSpec& spec) {
  if (errors.length() != spec.series_length)
    throw std::invalid_argument("add_segment_means: length mismatch");
  if (errors.dim() != spec.segment_means.cols())
    throw std::invalid_argument("add_segment_means: dimension mismatch");
  int segment = 0;
  for (int n = 1; n <= spec.series_length; ++n) {
    while (segment < static_cast<int>(spec.locations.size()) && n > spec.locations[segment])
      ++segment;
    errors.data.row(n - 1) += spec.segment_means.row(segment);
  }
  return errors;
}

enum class MeanScenario { h0, ha1, ha2, ha3, ha4 };

// The simulation study's mean configurations.  Change locations are floors
// of fixed fractions of N, computed in integer arithmetic so the floor is
// exact.
inline ChangeSpec mean_scenario(MeanScenario scenario, int series_length, const Grid& grid) {
  const auto frac = [&](int tenths) {
    return static_cast<int>(std::int64_t(tenths) * series_length / 10);
  };
  const Eigen::ArrayXd tau = grid.points.array();
  const int d = grid.size();
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<int> locations;
  std::vector<Eigen::VectorXd> means;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd level = Eigen::VectorXd::Constant(d, 0.05);
  switch (scenario) {
    case MeanScenario::h0:
      means = {zero};
      break;
    case MeanScenario::ha1:
      locations = {frac(5)};
      means = {zero, level};
      break;
    case MeanScenario::ha2:
      locations = {frac(3), frac(7)};
      means = {zero, level, (0.1 * (two_pi * tau).sin()).matrix()};
      break;
    case MeanScenario::ha3:
      locations = {frac(3), frac(6), frac(8)};
      means = {zero, level, zero, (0.1 * (two_pi * tau).sin()).matrix()};
      break;
    case MeanScenario::ha4:
      locations = {frac(2), frac(4), frac(6), frac(7), frac(9)};
      means = {zero,
               level,
               (0.1 * (two_pi * tau).sin()).matrix(),
               (0.1 * (two_pi * tau).cos()).matrix(),
               (-0.1 + 0.2 * tau).matrix(),
               (0.8 * (tau - 0.5).square() - 0.1).matrix()};
      break;
  }
  for (std::size_t k = 1; k < locations.size(); ++k)
    if (locations[k] <= locations[k - 1])
      throw std::invalid_argument("mean_scenario: change locations collide; N too small");
  Eigen::MatrixXd mean_matrix(means.size(), d);
  for (std::size_t k = 0; k < means.size(); ++k) mean_matrix.row(k) = means[k].transpose();
  return make_change_spec(series_length, std::move(locations), std::move(mean_matrix));
}

// ---------------------------------------------------------------------------
// Distributional panels
// ---------------------------------------------------------------------------

enum class PanelDistFamily { gaussian, student_t, skew_t };

struct PanelDist {
  PanelDistFamily family = PanelDistFamily::gaussian;
  double mean = 0.0;   // gaussian only
  double sd = 1.0;     // gaussian only
  double slant = 0.0;  // skew_t only
  double df = 0.0;     // student_t and skew_t

  static PanelDist normal(double mean, double sd) {
    return PanelDist{PanelDistFamily::gaussian, mean, sd, 0.0, 0.0};
  }
  static PanelDist student(double df) {
    return PanelDist{PanelDistFamily::student_t, 0.0, 1.0, 0.0, df};
  }
  static PanelDist skewed_t(double slant, double df) {
    return PanelDist{PanelDistFamily::skew_t, 0.0, 1.0, slant, df};
  }

  double sample(RngStream& stream) const {
    switch (family) {
      case PanelDistFamily::gaussian:
        return mean + sd * stream.normal();
      case PanelDistFamily::student_t:
        return stream.student_t(df);
      case PanelDistFamily::skew_t:
        return stream.skew_t(slant, df);
    }
    throw std::logic_error("PanelDist: unknown family");
  }
};

// Ground truth for a panel: at each time point n, M independent draws from
// the segment's distribution.
struct PanelSpec {
  int series_length = 0;
  int panel_size = 0;  // M draws per time point
  std::vector<int> locations;
  std::vector<PanelDist> segment_dists;  // one per segment, K+1 total
};

enum class PanelScenario { h0star, ha1star, ha2star };

inline PanelSpec panel_scenario(PanelScenario scenario, int series_length, int panel_size) {
  if (series_length < 1) throw std::invalid_argument("panel_scenario: need a positive length");
  if (panel_size < 2) throw std::invalid_argument("panel_scenario: need at least 2 draws per n");
  const auto frac = [&](int tenths) {
    return static_cast<int>(std::int64_t(tenths) * series_length / 10);
  };
  PanelSpec spec;
  spec.series_length = series_length;
  spec.panel_size = panel_size;
  switch (scenario) {
    case PanelScenario::h0star:
      spec.segment_dists = {PanelDist::normal(0.0, 1.0)};
      break;
    case PanelScenario::ha1star:
      spec.locations = {frac(3), frac(7)};
      spec.segment_dists = {PanelDist::normal(0.0, 1.0), PanelDist::normal(0.05, 1.0),
                            PanelDist::normal(0.05, 1.05)};
      break;
    case PanelScenario::ha2star:
      spec.locations = {frac(3), frac(7)};
      spec.segment_dists = {PanelDist::normal(0.0, 1.0), PanelDist::student(10.0),
                            PanelDist::skewed_t(0.05, 10.0)};
      break;
  }
  if (spec.locations.size() == 2 && spec.locations[0] >= spec.locations[1])
    throw std::invalid_argument("panel_scenario: change locations collide; N too small");
  return spec;
}

// Integration density for cdf curves: flat on [-a, a] with exponential
// tails, so far-tail cdf differences barely count.
inline double flattop_weight(double x, double a = 2.0) {
  if (x < -a) return std::exp(x + a);
  if (x > a) return std::exp(a - x);
  return 1.0;
}

// Uniform grid on [lo, hi] whose quadrature weights are flattop_weight * dx.
inline Grid panel_grid(int dim = 101, double lo = -6.0, double hi = 6.0, double flattop_a = 2.0) {
  if (dim < 2) throw std::invalid_argument("panel_grid: need at least two points");
  if (!(lo < hi)) throw std::invalid_argument("panel_grid: need lo < hi");
  Eigen::VectorXd points = Eigen::VectorXd::LinSpaced(dim, lo, hi);
  const double dx = (hi - lo) / (dim - 1);
  Eigen::VectorXd weights(dim);
  for (int j = 0; j < dim; ++j) weights[j] = flattop_weight(points[j], flattop_a) * dx;
  return make_grid(std::move(points), std::move(weights));
}

// Scaled empirical-cdf embedding of raw panel draws (row n = the M draws at
// time n): curve X_n = sqrt(M) * ecdf_n evaluated on the grid.  The plain
// ecdf rows are kept too, since the per-time covariance kernels need them.
struct PanelCurves {
  FtsSample sample;      // N x D, scaled by sqrt(M)
  Eigen::MatrixXd ecdf;  // N x D, values in [0, 1]
};

inline PanelCurves embed_panel(const Eigen::MatrixXd& draws, const Grid& grid) {
  const int n_total = static_cast<int>(draws.rows());
  const int m = static_cast<int>(draws.cols());
  if (n_total < 1 || m < 1) throw std::invalid_argument("embed_panel: empty panel");
  const int d = grid.size();
  Eigen::MatrixXd ecdf(n_total, d);
  std::vector<double> row(m);
  for (int n = 0; n < n_total; ++n) {
    for (int i = 0; i < m; ++i) row[i] = draws(n, i);
    std::sort(row.begin(), row.end());
    for (int j = 0; j < d; ++j) {
      const auto count = std::upper_bound(row.begin(), row.end(), grid.points[j]) - row.begin();
      ecdf(n, j) = double(count) / m;
    }
  }
  Eigen::MatrixXd scaled = std::sqrt(double(m)) * ecdf;
  return PanelCurves{make_sample(grid, std::move(scaled)), std::move(ecdf)};
}

inline Eigen::MatrixXd draw_panel(const PanelSpec& spec, std::uint64_t seed) {
  Eigen::MatrixXd draws(spec.series_length, spec.panel_size);
  int segment = 0;
  for (int n = 1; n <= spec.series_length; ++n) {
    while (segment < static_cast<int>(spec.locations.size()) && n > spec.locations[segment])
      ++segment;
    RngStream stream(mix_key(seed, n));
    for (int i = 0; i < spec.panel_size; ++i)
      draws(n - 1, i) = spec.segment_dists[segment].sample(stream);
  }
  return draws;
}

inline PanelCurves panel_to_curves(const PanelSpec& spec, const Grid& grid, std::uint64_t seed) {
  return embed_panel(draw_panel(spec, seed), grid);
}

// ---------------------------------------------------------------------------
// Monte Carlo harness
// ---------------------------------------------------------------------------

enum class ErrorModel { iid, far };

struct SimConfig {
  bool panel = false;
  ErrorModel errors = ErrorModel::iid;  // curve DGPs only
  MeanScenario mean = MeanScenario::h0;
  PanelScenario panel_dists = PanelScenario::h0star;
  int series_length = 100;
  int dim = 51;       // curve grid size
  double sigma = 0.1;  // B-spline coefficient sd
  double far_scale = 0.25;
  int panel_size = 100;  // M
  int panel_dim = 101;
};

struct DetectorConfig {
  WeightFunction weight = WeightFunction::polynomial(0.25);
  bool pyramid = false;
  double theta = 1.1;
  double alpha = 0.05;
  int boot_replicates = 200;
  CovEstimator cov = CovEstimator::first_difference;
  int block = 3;
};

// Localization scoring.  Weak: every reported interval [n-h+1, n+h] contains
// some true change (vacuously true when nothing is reported).  Strong: weak,
// plus every true change is covered, plus the detection count equals K.
inline bool covers(const ScanPair& p, int change) {
  return p.lo() <= change && change <= p.hi();
}

inline bool weak_localized(const DetectionSet& dets, const std::vector<int>& changes) {
  for (const Detection& det : dets.detections) {
    bool hit = false;
    for (int c : changes) hit = hit || covers(det.pair, c);
    if (!hit) return false;
  }
  return true;
}

inline bool strong_localized(const DetectionSet& dets, const std::vector<int>& changes) {
  if (!weak_localized(dets, changes)) return false;
  if (dets.size() != changes.size()) return false;
  for (int c : changes) {
    bool hit = false;
    for (const Detection& det : dets.detections) hit = hit || covers(det.pair, c);
    if (!hit) return false;
  }
  return true;
}

struct McReplication {
  bool rejected = false;
  bool weak = false;
  bool strong = false;
  DetectionSet detections;
};

struct McResult {
  int replications = 0;
  int rejections = 0;
  int weak_successes = 0;
  int strong_successes = 0;
  std::vector<int> true_locations;
  std::vector<McReplication> per_replication;

  double rejection_rate() const { return double(rejections) / replications; }
  double weak_rate() const { return double(weak_successes) / replications; }
  double strong_rate() const { return double(strong_successes) / replications; }
};

// Full study loop: per replication, generate data, estimate the covariance
// for the configured regime, bootstrap the threshold, run the scan, and
// score against the ground truth.  Replication r uses data substream
// (seed, r, 1) and bootstrap substream (seed, r, 2), so results are
// reproducible, independent of the thread count, and -- importantly for
// comparing detector settings -- two runs with the same seed see identical
// data.
inline McResult run_monte_carlo(const SimConfig& sim, const DetectorConfig& det,
                                int replications, std::uint64_t seed, unsigned threads = 0) {
  if (replications < 1) throw std::invalid_argument("run_monte_carlo: need replications >= 1");
  if (sim.panel != (det.cov == CovEstimator::ecdf_pointwise))
    throw std::invalid_argument(
        "run_monte_carlo: the ecdf covariance pairs with the panel DGP and only with it");

  const int n_total = sim.series_length;
  const ScanIndexSet set =
      det.pyramid ? pyramid_scan_pairs(n_total, det.theta) : all_scan_pairs(n_total);

  Grid grid = sim.panel ? panel_grid(sim.panel_dim) : Grid::uniform01(sim.dim);
  ChangeSpec mean_spec;
  PanelSpec panel_spec;
  std::vector<int> changes;
  if (sim.panel) {
    panel_spec = panel_scenario(sim.panel_dists, n_total, sim.panel_size);
    changes = panel_spec.locations;
  } else {
    mean_spec = mean_scenario(sim.mean, n_total, grid);
    changes = mean_spec.locations;
  }

  McResult result;
  result.replications = replications;
  result.true_locations = changes;
  result.per_replication.resize(replications);

  parallel_for(
      static_cast<std::size_t>(replications),
      [&](std::size_t r) {
        try {
          const std::uint64_t data_seed = mix_key(seed, r + 1, 1);
          BootstrapConfig boot;
          boot.replicates = det.boot_replicates;
          boot.alpha = det.alpha;
          boot.seed = mix_key(seed, r + 1, 2);
          boot.threads = 1;  // replications already run in parallel

          FtsSample sample;
          ThresholdResult thr;
          if (sim.panel) {
            PanelCurves pc = panel_to_curves(panel_spec, grid, data_seed);
            std::vector<CovRoot> roots;
            roots.reserve(n_total);
            for (int n = 0; n < n_total; ++n)
              roots.push_back(covariance_root(ecdf_covariance(pc.ecdf.row(n).transpose())));
            thr = bootstrap_threshold_panel(roots, grid, set, det.weight, boot);
            sample = std::move(pc.sample);
          } else {
            FtsSample errors = sim.errors == ErrorModel::iid
                                   ? iid_errors(n_total, sim.dim, sim.sigma, data_seed)
                                   : far_errors(n_total, sim.dim, sim.sigma, data_seed,
                                                sim.far_scale);
            sample = add_segment_means(std::move(errors), mean_spec);
            const CovOperator cov = det.cov == CovEstimator::first_difference
                                        ? first_difference_covariance(sample)
                                        : block_long_run_covariance(sample, det.block);
            thr = bootstrap_threshold(covariance_root(cov), n_total, grid, set, det.weight, boot);
          }

          McReplication& rep = result.per_replication[r];
          rep.detections = multiscan(sample, set, thr.threshold, det.weight);
          rep.rejected = !rep.detections.empty();
          rep.weak = weak_localized(rep.detections, changes);
          rep.strong = strong_localized(rep.detections, changes);
        } catch (const std::exception& e) {
          throw std::runtime_error("replication " + std::to_string(r + 1) + ": " + e.what());
        }
      },
      threads);

  for (const McReplication& rep : result.per_replication) {
    result.rejections += rep.rejected;
    result.weak_successes += rep.weak;
    result.strong_successes += rep.strong;
  }
  return result;
}

}  // namespace multiscan

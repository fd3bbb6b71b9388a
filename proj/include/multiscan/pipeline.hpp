#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "multiscan/bootstrap.hpp"
#include "multiscan/covariance.hpp"
#include "multiscan/dgp.hpp"
#include "multiscan/fts.hpp"
#include "multiscan/index_set.hpp"
#include "multiscan/io.hpp"
#include "multiscan/scan.hpp"
#include "multiscan/weights.hpp"

namespace multiscan {

// Everything a single invocation needs.  The CLI fills this from flags; the
// tests construct it directly.
struct RunConfig {
  // detector
  WeightFunction weight = WeightFunction::polynomial(0.25);
  bool pyramid = false;
  double theta = 1.1;
  double alpha = 0.05;
  int boot_replicates = 1000;
  std::uint64_t seed = 0;
  CovEstimator cov = CovEstimator::first_difference;
  int block = 3;
  unsigned threads = 0;

  // detect / threshold input
  std::string input_path;
  bool label_column = false;
  bool grid_header = false;
  bool emit_replicates = false;

  // grid for ecdf embedding of ingested panels
  int panel_dim = 101;
  double panel_lo = -6.0;
  double panel_hi = 6.0;
  double flattop_a = 2.0;

  // simulate
  SimConfig sim;
  int replications = 1000;
};

// ---------------------------------------------------------------------------
// Flag-value parsing (shared between CLI and tests)
// ---------------------------------------------------------------------------

inline WeightFunction parse_weight(const std::string& s) {
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const std::string family = s.substr(0, colon);
    double beta = 0.0;
    if (!detail::try_parse_number(s.substr(colon + 1), beta))
      throw std::invalid_argument("--weight: cannot parse beta in '" + s + "'");
    if (family == "poly") return WeightFunction::polynomial(beta);
    if (family == "log") return WeightFunction::logarithmic(beta);
  }
  throw std::invalid_argument("--weight must be poly:<beta> or log:<beta>, got '" + s + "'");
}

inline void parse_index_set(const std::string& s, bool& pyramid, double& theta) {
  if (s == "all") {
    pyramid = false;
    return;
  }
  if (s.rfind("pyramid:", 0) == 0) {
    double t = 0.0;
    if (!detail::try_parse_number(s.substr(8), t) || !(t > 1.0))
      throw std::invalid_argument("--index-set: pyramid needs theta > 1, got '" + s + "'");
    pyramid = true;
    theta = t;
    return;
  }
  throw std::invalid_argument("--index-set must be all or pyramid:<theta>, got '" + s + "'");
}

inline void parse_cov(const std::string& s, CovEstimator& cov, int& block) {
  if (s == "first-diff") {
    cov = CovEstimator::first_difference;
    return;
  }
  if (s == "ecdf") {
    cov = CovEstimator::ecdf_pointwise;
    return;
  }
  if (s.rfind("block:", 0) == 0) {
    double k = 0.0;
    if (!detail::try_parse_number(s.substr(6), k) || k < 1.0 || k != double(int(k)))
      throw std::invalid_argument("--cov: block needs an integer k >= 1, got '" + s + "'");
    cov = CovEstimator::block_long_run;
    block = int(k);
    return;
  }
  throw std::invalid_argument("--cov must be first-diff, block:<k>, or ecdf, got '" + s + "'");
}

// Scenario name -> DGP configuration.  Curve scenarios pair with --dgp
// iid/far; the starred panel scenarios require --dgp panel.
inline void parse_scenario(const std::string& dgp, const std::string& scenario, SimConfig& sim) {
  if (dgp == "iid" || dgp == "far") {
    sim.panel = false;
    sim.errors = dgp == "iid" ? ErrorModel::iid : ErrorModel::far;
    if (scenario == "H0") sim.mean = MeanScenario::h0;
    else if (scenario == "HA1") sim.mean = MeanScenario::ha1;
    else if (scenario == "HA2") sim.mean = MeanScenario::ha2;
    else if (scenario == "HA3") sim.mean = MeanScenario::ha3;
    else if (scenario == "HA4") sim.mean = MeanScenario::ha4;
    else
      throw std::invalid_argument("--scenario for curve DGPs must be H0 or HA1..HA4, got '" +
                                  scenario + "'");
    return;
  }
  if (dgp == "panel") {
    sim.panel = true;
    if (scenario == "H0star") sim.panel_dists = PanelScenario::h0star;
    else if (scenario == "HA1star") sim.panel_dists = PanelScenario::ha1star;
    else if (scenario == "HA2star") sim.panel_dists = PanelScenario::ha2star;
    else
      throw std::invalid_argument(
          "--scenario for the panel DGP must be H0star, HA1star, or HA2star, got '" + scenario +
          "'");
    return;
  }
  throw std::invalid_argument("--dgp must be iid, far, or panel, got '" + dgp + "'");
}

inline std::string index_set_spec(const RunConfig& cfg) {
  if (!cfg.pyramid) return "all";
  char buf[48];
  std::snprintf(buf, sizeof buf, "pyramid:%g", cfg.theta);
  return buf;
}

inline std::string cov_spec(const RunConfig& cfg) {
  switch (cfg.cov) {
    case CovEstimator::first_difference: return "first-diff";
    case CovEstimator::block_long_run: return "block:" + std::to_string(cfg.block);
    case CovEstimator::ecdf_pointwise: return "ecdf";
  }
  throw std::logic_error("cov_spec: unknown estimator");
}

// ---------------------------------------------------------------------------
// detect / threshold
// ---------------------------------------------------------------------------

namespace detail {

// Ingestion + covariance + bootstrap, shared by detect and threshold.
struct PreparedInput {
  FtsSample sample;
  std::vector<std::string> labels;
  ScanIndexSet set;
  ThresholdResult thr;
};

inline PreparedInput prepare_input(const RunConfig& cfg) {
  PreparedInput prep;
  BootstrapConfig boot;
  boot.replicates = cfg.boot_replicates;
  boot.alpha = cfg.alpha;
  boot.seed = cfg.seed;
  boot.threads = cfg.threads;

  if (cfg.cov == CovEstimator::ecdf_pointwise) {
    const PanelData panel = ingest_panel(cfg.input_path);
    const int n_total = static_cast<int>(panel.draws.rows());
    if (n_total < 4)
      throw FormatError("'" + cfg.input_path + "': need at least 4 time points, found " +
                        std::to_string(n_total));
    const Grid grid = panel_grid(cfg.panel_dim, cfg.panel_lo, cfg.panel_hi, cfg.flattop_a);
    PanelCurves pc = embed_panel(panel.draws, grid);
    std::vector<CovRoot> roots;
    roots.reserve(n_total);
    for (int n = 0; n < n_total; ++n)
      roots.push_back(covariance_root(ecdf_covariance(pc.ecdf.row(n).transpose())));
    prep.set = cfg.pyramid ? pyramid_scan_pairs(n_total, cfg.theta) : all_scan_pairs(n_total);
    prep.thr = bootstrap_threshold_panel(roots, grid, prep.set, cfg.weight, boot);
    prep.sample = std::move(pc.sample);
  } else {
    CurveData curves = ingest_curves(cfg.input_path, cfg.label_column, cfg.grid_header);
    const int n_total = curves.sample.length();
    const CovOperator cov = cfg.cov == CovEstimator::first_difference
                                ? first_difference_covariance(curves.sample)
                                : block_long_run_covariance(curves.sample, cfg.block);
    prep.set = cfg.pyramid ? pyramid_scan_pairs(n_total, cfg.theta) : all_scan_pairs(n_total);
    prep.thr = bootstrap_threshold(covariance_root(cov), n_total, curves.sample.grid, prep.set,
                                   cfg.weight, boot);
    prep.sample = std::move(curves.sample);
    prep.labels = std::move(curves.labels);
  }
  return prep;
}

inline nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["weight"] = cfg.weight.spec();
  j["index_set"] = index_set_spec(cfg);
  j["cov"] = cov_spec(cfg);
  j["alpha"] = cfg.alpha;
  j["B"] = cfg.boot_replicates;
  j["seed"] = cfg.seed;
  return j;
}

inline std::string format_stat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

struct DetectResult {
  nlohmann::ordered_json json;
  std::string table;           // fixed-width human view
  DetectionSet detections;     // sorted by center, as reported
  double threshold = 0.0;
};

inline DetectResult run_detect(const RunConfig& cfg) {
  detail::PreparedInput prep = detail::prepare_input(cfg);
  DetectionSet dets = multiscan(prep.sample, prep.set, prep.thr.threshold, cfg.weight);
  std::sort(dets.detections.begin(), dets.detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.pair.center != b.pair.center ? a.pair.center < b.pair.center
                                                    : a.pair.half_width < b.pair.half_width;
            });

  const auto label_of = [&](int n) -> std::string {
    if (!prep.labels.empty()) return prep.labels[static_cast<std::size_t>(n - 1)];
    return std::to_string(n);
  };

  DetectResult result;
  result.threshold = prep.thr.threshold;
  result.json = detail::config_echo(cfg);
  result.json["command"] = "detect";
  result.json["input"] = cfg.input_path;
  result.json["n"] = prep.sample.length();
  result.json["d"] = prep.sample.dim();
  result.json["threshold"] = prep.thr.threshold;
  result.json["detections"] = nlohmann::ordered_json::array();
  for (const Detection& det : dets.detections) {
    nlohmann::ordered_json row;
    row["n"] = det.pair.center;
    row["h"] = det.pair.half_width;
    row["gamma"] = det.stat;
    row["lo"] = det.pair.lo();
    row["hi"] = det.pair.hi();
    if (!prep.labels.empty()) {
      row["n_label"] = label_of(det.pair.center);
      row["lo_label"] = label_of(det.pair.lo());
      row["hi_label"] = label_of(det.pair.hi());
    }
    result.json["detections"].push_back(std::move(row));
  }

  // Fixed-width table: one row per detection, chronological, mirroring the
  // report layout with the threshold echoed above.
  std::vector<std::array<std::string, 4>> rows;
  for (const Detection& det : dets.detections)
    rows.push_back({label_of(det.pair.center), std::to_string(det.pair.half_width),
                    detail::format_stat(det.stat),
                    "[" + label_of(det.pair.lo()) + ", " + label_of(det.pair.hi()) + "]"});
  std::array<std::string, 4> head = {"n_max", "h", "gamma", "interval"};
  std::array<std::size_t, 4> width;
  for (std::size_t c = 0; c < 4; ++c) {
    width[c] = head[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::string table = "Detected change points (threshold q = " +
                      detail::format_stat(prep.thr.threshold) +
                      ", alpha = " + detail::format_stat(cfg.alpha) + ")\n";
  const auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w - s.size(), ' ');
  };
  for (std::size_t c = 0; c < 4; ++c) table += (c ? "  " : "  ") + pad(head[c], width[c]);
  table += "\n";
  if (rows.empty()) {
    table += "  (no change points detected)\n";
  } else {
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < 4; ++c) table += (c ? "  " : "  ") + pad(row[c], width[c]);
      table += "\n";
    }
  }
  result.table = std::move(table);
  result.detections = std::move(dets);
  return result;
}

inline nlohmann::ordered_json run_threshold(const RunConfig& cfg) {
  detail::PreparedInput prep = detail::prepare_input(cfg);
  nlohmann::ordered_json j = detail::config_echo(cfg);
  j["command"] = "threshold";
  j["input"] = cfg.input_path;
  j["n"] = prep.sample.length();
  j["d"] = prep.sample.dim();
  j["q"] = prep.thr.threshold;
  if (cfg.emit_replicates) j["replicates"] = prep.thr.replicate_stats;
  return j;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateResult {
  nlohmann::ordered_json json;
  std::string csv;                      // header + one row, paper-table layout
  std::vector<int> detected_locations;  // pooled centers across replications
  McResult mc;
};

inline SimulateResult run_simulate(const RunConfig& cfg) {
  DetectorConfig det;
  det.weight = cfg.weight;
  det.pyramid = cfg.pyramid;
  det.theta = cfg.theta;
  det.alpha = cfg.alpha;
  det.boot_replicates = cfg.boot_replicates;
  det.cov = cfg.cov;
  det.block = cfg.block;

  SimulateResult result;
  result.mc = run_monte_carlo(cfg.sim, det, cfg.replications, cfg.seed, cfg.threads);
  for (const McReplication& rep : result.mc.per_replication)
    for (const Detection& d : rep.detections.detections)
      result.detected_locations.push_back(d.pair.center);

  const bool null_truth = result.mc.true_locations.empty();
  const std::string dgp =
      cfg.sim.panel ? "panel" : (cfg.sim.errors == ErrorModel::iid ? "iid" : "far");
  std::string scenario;
  if (cfg.sim.panel) {
    scenario = cfg.sim.panel_dists == PanelScenario::h0star   ? "H0star"
               : cfg.sim.panel_dists == PanelScenario::ha1star ? "HA1star"
                                                               : "HA2star";
  } else {
    switch (cfg.sim.mean) {
      case MeanScenario::h0: scenario = "H0"; break;
      case MeanScenario::ha1: scenario = "HA1"; break;
      case MeanScenario::ha2: scenario = "HA2"; break;
      case MeanScenario::ha3: scenario = "HA3"; break;
      case MeanScenario::ha4: scenario = "HA4"; break;
    }
  }

  nlohmann::ordered_json j = detail::config_echo(cfg);
  j["command"] = "simulate";
  j["dgp"] = dgp;
  j["scenario"] = scenario;
  j["N"] = cfg.sim.series_length;
  j["R"] = cfg.replications;
  j["true_changes"] = result.mc.true_locations;
  j["rejections"] = result.mc.rejections;
  if (null_truth) {
    j["size"] = result.mc.rejection_rate();
  } else {
    j["power"] = result.mc.rejection_rate();
    j["weak"] = result.mc.weak_rate();
    j["strong"] = result.mc.strong_rate();
    j["weak_successes"] = result.mc.weak_successes;
    j["strong_successes"] = result.mc.strong_successes;
  }
  result.json = std::move(j);

  char buf[160];
  if (null_truth) {
    std::snprintf(buf, sizeof buf, "%.4f", result.mc.rejection_rate());
    result.csv = "dgp,scenario,N,R,B,alpha,weight,index_set,size\n" + dgp + "," + scenario + "," +
                 std::to_string(cfg.sim.series_length) + "," + std::to_string(cfg.replications) +
                 "," + std::to_string(cfg.boot_replicates) + "," +
                 detail::format_stat(cfg.alpha) + "," + cfg.weight.spec() + "," +
                 index_set_spec(cfg) + "," + buf + "\n";
  } else {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f", result.mc.rejection_rate(),
                  result.mc.weak_rate(), result.mc.strong_rate());
    result.csv = "dgp,scenario,N,R,B,alpha,weight,index_set,power,weak,strong\n" + dgp + "," +
                 scenario + "," + std::to_string(cfg.sim.series_length) + "," +
                 std::to_string(cfg.replications) + "," + std::to_string(cfg.boot_replicates) +
                 "," + detail::format_stat(cfg.alpha) + "," + cfg.weight.spec() + "," +
                 index_set_spec(cfg) + "," + buf + "\n";
  }
  return result;
}

}  // namespace multiscan

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cvsim/circuit.hpp"
#include "cvsim/clifford.hpp"
#include "cvsim/stats.hpp"

// The four ensemble experiments, as deterministic functions of their
// parameter structs. The CLI adds file output on top; the acceptance suite
// asserts on the returned values directly.

namespace cvsim {

namespace detail {

inline void parallel_for(int n_items, int workers, const std::function<void(int)>& body) {
  if (workers < 1) workers = 1;
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items) return;
      body(i);
    }
  };
  if (workers == 1 || n_items <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  const int n_workers = std::min(workers, n_items);
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Mean of each trajectory's series over [lo, hi], then mean/stderr across
// trajectories. Collapsing time first keeps the samples independent.
inline MeanStderr saturation_estimate(const std::vector<TrajectoryRecord>& records, int lo,
                                      int hi) {
  std::vector<double> per_traj;
  per_traj.reserve(records.size());
  for (const auto& r : records) {
    if (hi >= static_cast<int>(r.series.size()) || lo < 0 || lo > hi) {
      throw std::invalid_argument("saturation_estimate: window out of range");
    }
    double acc = 0.0;
    for (int t = lo; t <= hi; ++t) acc += r.series[t];
    per_traj.push_back(acc / (hi - lo + 1));
  }
  return mean_stderr(per_traj);
}

inline int saturation_window_lo(int steps) { return steps - std::max(1, steps / 4) + 1; }

// ---------------------------------------------------------------------------
// Unitary growth (p = 0)

struct UnitaryGrowthParams {
  int sites = 64;
  int steps = 200;
  int n_traj = 100;
  int early_lo = 3, early_hi = 12;  // log-log window for the t^2 regime
  // Default -1: min(2L, 3T/4). The local log-log slope stays near 2 until
  // t ~ L and the linear regime is only clean past t ~ 2L, so the fit window
  // starts there when T allows.
  int late_lo = -1;
  ParityPolicy parity = ParityPolicy::RandomEqualMix;
  std::uint64_t seed = 1;
  int workers = 1;
  int cut = -1;
};

struct UnitaryGrowthResult {
  EnsembleSummary summary;
  std::vector<TrajectoryRecord> records;
  // Fits are absent when the requested window does not fit into [1, T]
  // (short diagnostic runs).
  std::optional<LinearFit> early_loglog;  // slope ~2 for quadratic growth
  std::optional<LinearFit> late_linear;
  int late_lo = 0;
};

inline UnitaryGrowthResult run_unitary_growth(const UnitaryGrowthParams& p) {
  CircuitConfig cfg;
  cfg.sites = p.sites;
  cfg.steps = p.steps;
  cfg.measure_prob = 0.0;
  cfg.channel = ChannelKind::VacuumProjection;
  cfg.parity = p.parity;
  cfg.seed = p.seed;
  cfg.cut = p.cut;
  UnitaryGrowthResult res;
  res.records = run_trajectories(cfg, p.n_traj, p.workers);
  res.summary = summarize(res.records);

  if (p.early_lo >= 1 && p.early_hi > p.early_lo && p.early_hi <= p.steps) {
    std::vector<double> lx, ly;
    for (int t = p.early_lo; t <= p.early_hi; ++t) {
      lx.push_back(std::log(double(t)));
      ly.push_back(std::log(res.summary.mean[t]));
    }
    res.early_loglog = linear_fit(lx, ly);
  }

  res.late_lo = p.late_lo < 0 ? std::min(2 * p.sites, 3 * p.steps / 4) : p.late_lo;
  if (res.late_lo >= 1 && res.late_lo < p.steps) {
    std::vector<double> tx, ty;
    for (int t = res.late_lo; t <= p.steps; ++t) {
      tx.push_back(double(t));
      ty.push_back(res.summary.mean[t]);
    }
    res.late_linear = linear_fit(tx, ty);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Measured circuit (p > 0), several system sizes

struct MeasuredCircuitParams {
  std::vector<int> sites_list = {16, 32, 64};
  double p = 0.2;
  int steps = 200;
  int n_traj = 200;
  ParityPolicy parity = ParityPolicy::RandomEqualMix;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct MeasuredCell {
  int sites = 0;
  EnsembleSummary summary;
  std::vector<TrajectoryRecord> records;
  MeanStderr saturation;  // last quarter of the series
  int window_lo = 0;
};

struct MeasuredCircuitResult {
  std::vector<MeasuredCell> cells;  // one per L, in sites_list order
};

inline MeasuredCircuitResult run_measured_circuit(const MeasuredCircuitParams& p) {
  if (p.p <= 0.0) {
    throw std::invalid_argument("measured circuit: p must be > 0 (p = 0 is the unitary run)");
  }
  MeasuredCircuitResult res;
  int idx = 0;
  for (int sites : p.sites_list) {
    CircuitConfig cfg;
    cfg.sites = sites;
    cfg.steps = p.steps;
    cfg.measure_prob = p.p;
    cfg.channel = ChannelKind::VacuumProjection;
    cfg.parity = p.parity;
    cfg.seed = derive_seed(p.seed, static_cast<std::uint64_t>(idx++));
    MeasuredCell cell;
    cell.sites = sites;
    cell.records = run_trajectories(cfg, p.n_traj, p.workers);
    cell.summary = summarize(cell.records);
    cell.window_lo = saturation_window_lo(p.steps);
    cell.saturation = saturation_estimate(cell.records, cell.window_lo, p.steps);
    res.cells.push_back(std::move(cell));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Imaginary-time channel at p = 1, beta sweep

struct BetaCircuitParams {
  std::vector<double> betas = {0.1, 0.3, 1.0};
  std::vector<int> sites_list = {16, 32};
  int steps = 200;
  int n_traj = 200;
  ParityPolicy parity = ParityPolicy::RandomEqualMix;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct BetaCell {
  double beta = 0.0;
  int sites = 0;
  EnsembleSummary summary;
  std::vector<TrajectoryRecord> records;
  MeanStderr saturation;
  int window_lo = 0;
};

struct BetaCircuitResult {
  std::vector<BetaCell> cells;  // beta-major, sites-minor order
};

inline BetaCircuitResult run_beta_circuit(const BetaCircuitParams& p) {
  BetaCircuitResult res;
  int idx = 0;
  for (double beta : p.betas) {
    if (beta < 0.0) throw std::invalid_argument("beta circuit: beta must be >= 0");
    for (int sites : p.sites_list) {
      CircuitConfig cfg;
      cfg.sites = sites;
      cfg.steps = p.steps;
      cfg.measure_prob = 1.0;
      cfg.channel = ChannelKind::BetaGate;
      cfg.beta = beta;
      cfg.parity = p.parity;
      cfg.seed = derive_seed(p.seed, static_cast<std::uint64_t>(idx++));
      BetaCell cell;
      cell.beta = beta;
      cell.sites = sites;
      cell.records = run_trajectories(cfg, p.n_traj, p.workers);
      cell.summary = summarize(cell.records);
      cell.window_lo = saturation_window_lo(p.steps);
      cell.saturation = saturation_estimate(cell.records, cell.window_lo, p.steps);
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Clifford cluster mutual-information sweep

struct CliffordMiParams {
  int sites = 64;
  std::vector<int> cluster_sizes = {1, 2};
  double p_min = 0.02, p_max = 0.50, dp = 0.02;
  int samples = 24;
  int region_len = 4;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct CliffordMiRow {
  int cluster_size = 0;
  double p = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

struct CliffordMiResult {
  std::vector<CliffordMiRow> rows;       // cluster-major, p ascending
  std::map<int, double> peak_p;          // argmax of mean I_AB per cluster size
};

inline std::vector<double> p_sweep_values(double p_min, double p_max, double dp) {
  if (!(dp > 0.0) || p_min < 0.0 || p_max > 1.0 || p_min > p_max) {
    throw std::invalid_argument("clifford sweep: bad p range");
  }
  std::vector<double> ps;
  for (int i = 0;; ++i) {
    const double p = p_min + i * dp;
    if (p > p_max + 1e-12) break;
    ps.push_back(std::min(p, 1.0));
  }
  return ps;
}

inline CliffordMiResult run_clifford_mi(const CliffordMiParams& prm) {
  const std::vector<double> ps = p_sweep_values(prm.p_min, prm.p_max, prm.dp);
  CliffordMiResult res;
  for (std::size_t ni = 0; ni < prm.cluster_sizes.size(); ++ni) {
    const int n_cluster = prm.cluster_sizes[ni];
    const std::uint64_t seed_n = derive_seed(prm.seed, ni);
    // Flat (p, sample) grid; every cell has its own derived seed.
    std::vector<double> cell_values(ps.size() * prm.samples);
    detail::parallel_for(
        static_cast<int>(cell_values.size()), prm.workers, [&](int cell) {
          const int pi = cell / prm.samples;
          const int sample = cell % prm.samples;
          CliffordConfig cfg;
          cfg.sites = prm.sites;
          cfg.cluster_size = n_cluster;
          cfg.measure_prob = ps[pi];
          cfg.region_len = prm.region_len;
          cfg.seed = derive_seed(derive_seed(seed_n, pi), sample);
          Rng rng(cfg.seed);
          cell_values[cell] = steady_state_mutual_information(cfg, rng);
        });
    double best_mean = -1.0;
    double best_p = ps.empty() ? 0.0 : ps.front();
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      std::span<const double> vals(cell_values.data() + pi * prm.samples,
                                   static_cast<std::size_t>(prm.samples));
      const MeanStderr ms = mean_stderr(vals);
      res.rows.push_back(CliffordMiRow{n_cluster, ps[pi], ms.mean, ms.stderr_, prm.samples});
      if (ms.mean > best_mean) {
        best_mean = ms.mean;
        best_p = ps[pi];
      }
    }
    res.peak_p[n_cluster] = best_p;
  }
  return res;
}

}  // namespace cvsim

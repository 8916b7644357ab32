#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cvsim/channels.hpp"
#include "cvsim/gates.hpp"
#include "cvsim/gaussian_state.hpp"
#include "cvsim/pure_frame.hpp"
#include "cvsim/rng.hpp"

// Brickwork hybrid circuit: per step, random phase rotation + one-mode
// squeeze on every site, beam splitters on alternating bonds of an open
// chain, then the non-unitary channel (per-site vacuum projection with
// probability p, or an imaginary-time gate on every site).

namespace cvsim {

enum class ChannelKind { VacuumProjection, BetaGate };
enum class ParityPolicy { OddFirst, EvenFirst, RandomEqualMix };

struct CircuitConfig {
  int sites = 16;                                      // L, one mode per site
  int steps = 100;                                     // T
  double measure_prob = 0.0;                           // p in [0, 1]
  ChannelKind channel = ChannelKind::VacuumProjection;
  double beta = 0.0;                                   // BetaGate strength
  ParityPolicy parity = ParityPolicy::RandomEqualMix;
  std::uint64_t seed = 0;
  int cut = -1;                                        // -1: contiguous half [0, L/2)
  bool track_purity = false;                           // covariance runs only

  int cut_size() const { return cut < 0 ? sites / 2 : cut; }

  void validate() const {
    if (sites < 2) throw std::invalid_argument("circuit: need at least 2 sites");
    if (steps < 0) throw std::invalid_argument("circuit: steps must be >= 0");
    if (measure_prob < 0.0 || measure_prob > 1.0) {
      throw std::invalid_argument("circuit: measurement probability must be in [0, 1]");
    }
    if (beta < 0.0) throw std::invalid_argument("circuit: beta must be >= 0");
    if (cut < 0 && sites % 2 != 0) {
      throw std::invalid_argument("circuit: half-system cut needs even L");
    }
    const int c = cut_size();
    if (c < 1 || c >= sites) throw std::invalid_argument("circuit: cut out of range");
  }

  // Purely unitary dynamics (no channel ever fires); these runs use the
  // symplectic-frame representation.
  bool effectively_unitary() const {
    return (channel == ChannelKind::VacuumProjection && measure_prob == 0.0) ||
           (channel == ChannelKind::BetaGate && beta == 0.0);
  }
};

struct TrajectoryRecord {
  std::vector<double> series;  // S_2 of the cut at t = 0..T, nats
  CircuitConfig config;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  int first_parity = 0;             // bond parity used at step 0
  double max_purity_defect = 0.0;   // max_t |det(2M) - 1| when track_purity
};

struct EnsembleSummary {
  std::vector<double> mean;     // per time step
  std::vector<double> stderr_;  // sample std / sqrt(n_traj)
  int n_traj = 0;
  int count_even_first = 0;
  int count_odd_first = 0;
};

// All random draws for one step, in a fixed order, so the covariance and
// frame runners consume identical streams.
struct StepPlan {
  std::vector<double> thetas;          // per site
  std::vector<double> squeezes;        // per site
  std::vector<double> bond_phis;       // per bond of this step's parity
  std::vector<std::uint8_t> measured;  // per site; empty unless drawn
  int bond_parity = 0;
};

inline int first_parity_for(const CircuitConfig& cfg, Rng& rng) {
  switch (cfg.parity) {
    case ParityPolicy::OddFirst:
      return 1;
    case ParityPolicy::EvenFirst:
      return 0;
    case ParityPolicy::RandomEqualMix:
      return rng.bernoulli(0.5) ? 1 : 0;
  }
  return 0;
}

inline StepPlan make_step_plan(const CircuitConfig& cfg, Rng& rng, int step_index,
                               int first_parity) {
  StepPlan plan;
  const int l = cfg.sites;
  plan.bond_parity = (first_parity + step_index) % 2;
  plan.thetas.resize(l);
  plan.squeezes.resize(l);
  for (int i = 0; i < l; ++i) {
    plan.thetas[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    plan.squeezes[i] = rng.uniform();
  }
  for (int b = plan.bond_parity; b + 1 < l; b += 2) {
    plan.bond_phis.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  if (cfg.channel == ChannelKind::VacuumProjection && cfg.measure_prob > 0.0) {
    plan.measured.resize(l);
    for (int i = 0; i < l; ++i) plan.measured[i] = rng.bernoulli(cfg.measure_prob) ? 1 : 0;
  }
  return plan;
}

namespace detail {

inline Eigen::Matrix2d site_gate(double theta, double r) {
  // Phase rotation first, then squeeze.
  Eigen::Matrix2d rot;
  rot << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  Eigen::Matrix2d sq;
  sq << std::exp(r), 0.0, 0.0, std::exp(-r);
  return sq * rot;
}

// Gate layers on the covariance, without the per-gate re-symmetrization of
// the public apply_symplectic (one pass at the end of the step suffices).
inline void apply_plan_covariance(GaussianState& state, const CircuitConfig& cfg,
                                  const StepPlan& plan) {
  Eigen::MatrixXd& m = state.mutable_covariance();
  const int l = cfg.sites;
  for (int i = 0; i < l; ++i) {
    const Eigen::Matrix2d g = site_gate(plan.thetas[i], plan.squeezes[i]);
    const int q = i, p = l + i;
    Eigen::RowVectorXd row_q = g(0, 0) * m.row(q) + g(0, 1) * m.row(p);
    m.row(p) = g(1, 0) * m.row(q) + g(1, 1) * m.row(p);
    m.row(q) = row_q;
    Eigen::VectorXd col_q = g(0, 0) * m.col(q) + g(0, 1) * m.col(p);
    m.col(p) = g(1, 0) * m.col(q) + g(1, 1) * m.col(p);
    m.col(q) = col_q;
  }
  std::size_t nb = 0;
  for (int b = plan.bond_parity; b + 1 < l; b += 2, ++nb) {
    const double phi = plan.bond_phis[nb];
    const double c = std::cos(phi), sn = std::sin(phi);
    for (int off : {0, l}) {
      const int a = off + b, bb = off + b + 1;
      Eigen::RowVectorXd row_a = c * m.row(a) + sn * m.row(bb);
      m.row(bb) = -sn * m.row(a) + c * m.row(bb);
      m.row(a) = row_a;
      Eigen::VectorXd col_a = c * m.col(a) + sn * m.col(bb);
      m.col(bb) = -sn * m.col(a) + c * m.col(bb);
      m.col(a) = col_a;
    }
  }
  state.resymmetrize();
}

inline void apply_plan_frame(PureFrame& frame, const CircuitConfig& cfg,
                             const StepPlan& plan) {
  const int l = cfg.sites;
  for (int i = 0; i < l; ++i) {
    frame.apply_one_mode(site_gate(plan.thetas[i], plan.squeezes[i]), i);
  }
  std::size_t nb = 0;
  for (int b = plan.bond_parity; b + 1 < l; b += 2, ++nb) {
    frame.apply_bond_rotation(plan.bond_phis[nb], b, b + 1);
  }
}

}  // namespace detail

// One circuit step on a covariance-backed state: site gates, bond beam
// splitters, then the channel.
inline GaussianState run_step(const GaussianState& state, const CircuitConfig& cfg,
                              Rng& rng, int step_index, int first_parity) {
  if (state.modes() != cfg.sites) {
    throw std::invalid_argument("run_step: state/config mode mismatch");
  }
  const StepPlan plan = make_step_plan(cfg, rng, step_index, first_parity);
  GaussianState out = state;
  detail::apply_plan_covariance(out, cfg, plan);
  if (cfg.channel == ChannelKind::VacuumProjection) {
    for (int i = 0; i < cfg.sites; ++i) {
      if (!plan.measured.empty() && plan.measured[i]) project_vacuum_in_place(out, i);
    }
  } else {
    for (int i = 0; i < cfg.sites; ++i) {
      imaginary_time_number_in_place(out, BetaGate{cfg.beta, i});
    }
  }
  return out;
}

inline int resolved_first_parity(const CircuitConfig& cfg) {
  if (cfg.parity == ParityPolicy::RandomEqualMix) {
    throw std::invalid_argument("run_step: random-equal-mix parity is drawn per trajectory");
  }
  return cfg.parity == ParityPolicy::OddFirst ? 1 : 0;
}

inline GaussianState run_step(const GaussianState& state, const CircuitConfig& cfg,
                              Rng& rng, int step_index) {
  return run_step(state, cfg, rng, step_index, resolved_first_parity(cfg));
}

// Deterministic function of (config, seed): the half-cut S_2 series.
inline TrajectoryRecord run_trajectory(const CircuitConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.seed = cfg.seed;
  rec.series.reserve(cfg.steps + 1);
  Rng rng(cfg.seed);
  rec.first_parity = first_parity_for(cfg, rng);
  const int cut = cfg.cut_size();
  std::vector<int> region(cut);
  for (int i = 0; i < cut; ++i) region[i] = i;

  if (cfg.effectively_unitary()) {
    PureFrame frame(cfg.sites);
    rec.series.push_back(frame.region_renyi2(cut));
    for (int t = 0; t < cfg.steps; ++t) {
      const StepPlan plan = make_step_plan(cfg, rng, t, rec.first_parity);
      detail::apply_plan_frame(frame, cfg, plan);
      rec.series.push_back(frame.region_renyi2(cut));
    }
  } else {
    GaussianState state = GaussianState::vacuum(cfg.sites);
    rec.series.push_back(renyi_entropy(state, region, 2.0).value);
    for (int t = 0; t < cfg.steps; ++t) {
      state = run_step(state, cfg, rng, t, rec.first_parity);
      rec.series.push_back(renyi_entropy(state, region, 2.0).value);
      if (cfg.track_purity) {
        const double log_det = detail::log_det_2m(state.covariance());
        rec.max_purity_defect =
            std::max(rec.max_purity_defect, std::abs(std::expm1(log_det)));
      }
    }
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// n_traj independent trajectories, trajectory k seeded with
// derive_seed(cfg.seed, k). The worker count never changes the result.
inline std::vector<TrajectoryRecord> run_trajectories(const CircuitConfig& cfg, int n_traj,
                                                      int workers) {
  if (n_traj < 1) throw std::invalid_argument("run_trajectories: n_traj must be >= 1");
  if (workers < 1) workers = 1;
  std::vector<TrajectoryRecord> records(n_traj);
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= n_traj) return;
      CircuitConfig traj_cfg = cfg;
      traj_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
      records[k] = run_trajectory(traj_cfg);
    }
  };
  if (workers == 1 || n_traj == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const int n_workers = std::min(workers, n_traj);
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

inline EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no trajectories");
  const std::size_t len = records.front().series.size();
  EnsembleSummary s;
  s.n_traj = static_cast<int>(records.size());
  s.mean.assign(len, 0.0);
  s.stderr_.assign(len, 0.0);
  for (const auto& r : records) {
    if (r.series.size() != len) throw std::invalid_argument("summarize: ragged series");
    for (std::size_t t = 0; t < len; ++t) s.mean[t] += r.series[t];
    (r.first_parity == 0 ? s.count_even_first : s.count_odd_first) += 1;
  }
  for (std::size_t t = 0; t < len; ++t) s.mean[t] /= s.n_traj;
  if (s.n_traj > 1) {
    for (std::size_t t = 0; t < len; ++t) {
      double ss = 0.0;
      for (const auto& r : records) {
        const double d = r.series[t] - s.mean[t];
        ss += d * d;
      }
      s.stderr_[t] = std::sqrt(ss / (s.n_traj - 1)) / std::sqrt(double(s.n_traj));
    }
  }
  return s;
}

inline EnsembleSummary run_ensemble(const CircuitConfig& cfg, int n_traj, int workers) {
  return summarize(run_trajectories(cfg, n_traj, workers));
}

}  // namespace cvsim

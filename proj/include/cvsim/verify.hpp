#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "cvsim/channels.hpp"
#include "cvsim/circuit.hpp"
#include "cvsim/experiments.hpp"
#include "cvsim/fock_oracle.hpp"
#include "cvsim/gates.hpp"
#include "cvsim/gaussian_state.hpp"
#include "cvsim/rng.hpp"

// Cross-validation of the covariance engine against the truncated-Fock
// verifier on random 2-mode operation sequences, plus the analytic channel
// limits. This backs the `verify` CLI command and the oracle-equivalence
// acceptance checks.

namespace cvsim {

// One operation of a random sequence; gates reuse fock::GateOp, the two
// non-unitary channels are tagged separately.
struct SequenceOp {
  enum class Kind { Gate, ProjectVacuum, BetaGate } kind = Kind::Gate;
  fock::GateOp gate;
  int mode = 0;
  double beta = 0.0;
};

struct VerifyOptions {
  int n_sequences = 200;
  int min_ops = 4, max_ops = 10;
  // Cumulative squeezing budget per sequence. Keeps occupation numbers low
  // enough that the Fock truncation converges below its hard cap; individual
  // squeeze parameters still range over [0, 1].
  double squeeze_budget = 1.0;
  std::uint64_t seed = 7;
  int workers = 1;
  double tolerance = 1e-5;       // covariance and Renyi-2 residual bound
  double convergence = 1e-8;     // cutoff-doubling stability
  double tail_bound = 1e-10;
};

struct SequenceCheck {
  int index = 0;
  int n_ops = 0;
  double cov_residual = 0.0;    // engine covariance vs oracle covariance
  double renyi_residual = 0.0;  // oracle density-matrix S2 vs Gaussian S2
  int cutoff = 0;
  double tail = 0.0;
  bool converged = false;
};

struct ChannelLimitCheck {
  double beta_inf_residual = 0.0;   // beta = 20 channel vs vacuum projection
  double semigroup_residual = 0.0;  // beta1 then beta2 vs beta1 + beta2
};

struct VerifyReport {
  std::vector<SequenceCheck> sequences;
  double max_cov_residual = 0.0;
  double max_renyi_residual = 0.0;
  ChannelLimitCheck limits;
  double tolerance = 1e-5;
  bool pass = false;
};

namespace detail {

inline std::vector<SequenceOp> sample_sequence(Rng& rng, const VerifyOptions& opt) {
  const int n_ops =
      opt.min_ops + static_cast<int>(rng.below(opt.max_ops - opt.min_ops + 1));
  double budget = opt.squeeze_budget;
  std::vector<SequenceOp> ops;
  ops.reserve(n_ops);
  for (int i = 0; i < n_ops; ++i) {
    SequenceOp op;
    // Draw the op kind; squeezing kinds are redrawn once the budget is spent.
    for (;;) {
      const int kind = static_cast<int>(rng.below(6));
      const int mode = static_cast<int>(rng.below(2));
      if (kind == 0) {
        op.kind = SequenceOp::Kind::Gate;
        op.gate = {fock::GateKind::PhaseRotation, rng.uniform(0.0, 2.0 * std::numbers::pi),
                   mode, 1 - mode};
      } else if (kind == 1) {
        if (budget < 0.05) continue;
        const double r = rng.uniform() * std::min(1.0, budget);
        budget -= r;
        op.kind = SequenceOp::Kind::Gate;
        op.gate = {fock::GateKind::Squeeze, r, mode, 1 - mode};
      } else if (kind == 2) {
        op.kind = SequenceOp::Kind::Gate;
        op.gate = {fock::GateKind::BeamSplitter, rng.uniform(0.0, 2.0 * std::numbers::pi), 0, 1};
      } else if (kind == 3) {
        if (budget < 0.05) continue;
        const double r = rng.uniform() * std::min(1.0, budget);
        budget -= r;
        op.kind = SequenceOp::Kind::Gate;
        op.gate = {fock::GateKind::TwoModeSqueeze, r, 0, 1};
      } else if (kind == 4) {
        op.kind = SequenceOp::Kind::ProjectVacuum;
        op.mode = mode;
      } else {
        op.kind = SequenceOp::Kind::BetaGate;
        op.mode = mode;
        op.beta = rng.uniform(0.2, 1.0);
      }
      break;
    }
    ops.push_back(op);
  }
  return ops;
}

inline GaussianState replay_on_engine(const std::vector<SequenceOp>& ops) {
  GaussianState state = GaussianState::vacuum(2);
  for (const auto& op : ops) {
    switch (op.kind) {
      case SequenceOp::Kind::Gate: {
        switch (op.gate.kind) {
          case fock::GateKind::PhaseRotation: {
            const int m[] = {op.gate.mode_a};
            state.apply_symplectic_in_place(phase_rotation(op.gate.param), m);
            break;
          }
          case fock::GateKind::Squeeze: {
            const int m[] = {op.gate.mode_a};
            state.apply_symplectic_in_place(one_mode_squeeze(op.gate.param), m);
            break;
          }
          case fock::GateKind::BeamSplitter: {
            const int m[] = {op.gate.mode_a, op.gate.mode_b};
            state.apply_symplectic_in_place(beam_splitter(op.gate.param), m);
            break;
          }
          case fock::GateKind::TwoModeSqueeze: {
            const int m[] = {op.gate.mode_a, op.gate.mode_b};
            state.apply_symplectic_in_place(two_mode_squeeze(op.gate.param), m);
            break;
          }
        }
        break;
      }
      case SequenceOp::Kind::ProjectVacuum:
        project_vacuum_in_place(state, op.mode);
        break;
      case SequenceOp::Kind::BetaGate:
        imaginary_time_number_in_place(state, BetaGate{op.beta, op.mode});
        break;
    }
  }
  return state;
}

inline fock::FockState replay_on_oracle(const std::vector<SequenceOp>& ops, int cutoff) {
  fock::FockState st = fock::oracle_vacuum(2, cutoff);
  for (const auto& op : ops) {
    switch (op.kind) {
      case SequenceOp::Kind::Gate:
        fock::oracle_apply_unitary_in_place(st, op.gate);
        break;
      case SequenceOp::Kind::ProjectVacuum:
        fock::oracle_project_zero_in_place(st, op.mode);
        break;
      case SequenceOp::Kind::BetaGate:
        fock::oracle_imaginary_in_place(st, op.mode, op.beta);
        break;
    }
  }
  return st;
}

}  // namespace detail

// Run one sequence at doubling cutoffs until every reported quantity is
// stable and the truncation tail is negligible.
inline SequenceCheck check_sequence(const std::vector<SequenceOp>& ops,
                                    const VerifyOptions& opt) {
  SequenceCheck out;
  out.n_ops = static_cast<int>(ops.size());
  const GaussianState engine = detail::replay_on_engine(ops);

  std::optional<Eigen::MatrixXd> prev_cov;
  std::optional<double> prev_renyi;
  for (int cutoff : {20, 40, 80, 120}) {
    const fock::FockState st = detail::replay_on_oracle(ops, cutoff);
    const Eigen::MatrixXd cov = fock::covariance_of(st);
    const int region[] = {0};
    const double renyi = fock::oracle_renyi2(st, region);
    const double tail = fock::max_tail_weight(st);
    out.cutoff = cutoff;
    out.tail = tail;
    const bool stable = prev_cov && (cov - *prev_cov).cwiseAbs().maxCoeff() < opt.convergence &&
                        std::abs(renyi - *prev_renyi) < opt.convergence;
    prev_cov = cov;
    prev_renyi = renyi;
    if (stable && tail < opt.tail_bound) {
      out.converged = true;
      out.cov_residual = (cov - engine.covariance()).cwiseAbs().maxCoeff();
      const GaussianState from_oracle = GaussianState::from_covariance(2, cov);
      // Gaussian formula applied to the oracle's own covariance; also compare
      // against the engine's entropy so both routes are exercised.
      const double gauss_from_oracle = renyi_entropy(from_oracle, region, 2.0).value;
      const double gauss_from_engine = renyi_entropy(engine, region, 2.0).value;
      out.renyi_residual = std::max(std::abs(renyi - gauss_from_oracle),
                                    std::abs(renyi - gauss_from_engine));
      break;
    }
  }
  return out;
}

// beta -> infinity limit and semigroup property on random circuit states.
inline ChannelLimitCheck check_channel_limits(std::uint64_t seed, int n_states = 20) {
  ChannelLimitCheck out;
  Rng rng(seed);
  for (int i = 0; i < n_states; ++i) {
    // Random 3-mode pure state from a few bounded gates.
    GaussianState state = GaussianState::vacuum(3);
    for (int g = 0; g < 6; ++g) {
      const int m = static_cast<int>(rng.below(3));
      const int m1[] = {m};
      state.apply_symplectic_in_place(phase_rotation(rng.uniform(0.0, 2.0 * std::numbers::pi)), m1);
      state.apply_symplectic_in_place(one_mode_squeeze(rng.uniform(0.0, 0.8)), m1);
      const int a = static_cast<int>(rng.below(3));
      const int b = (a + 1 + static_cast<int>(rng.below(2))) % 3;
      const int m2[] = {a, b};
      state.apply_symplectic_in_place(beam_splitter(rng.uniform(0.0, 2.0 * std::numbers::pi)), m2);
    }
    const int mode = static_cast<int>(rng.below(3));
    const GaussianState deep = imaginary_time_number(state, BetaGate{20.0, mode});
    const GaussianState projected = project_vacuum(state, mode);
    out.beta_inf_residual = std::max(
        out.beta_inf_residual,
        (deep.covariance() - projected.covariance()).cwiseAbs().maxCoeff());

    const double b1 = rng.uniform(0.05, 1.0), b2 = rng.uniform(0.05, 1.0);
    const GaussianState two_step = imaginary_time_number(
        imaginary_time_number(state, BetaGate{b1, mode}), BetaGate{b2, mode});
    const GaussianState one_step = imaginary_time_number(state, BetaGate{b1 + b2, mode});
    out.semigroup_residual = std::max(
        out.semigroup_residual,
        (two_step.covariance() - one_step.covariance()).cwiseAbs().maxCoeff());
  }
  return out;
}

inline VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport report;
  report.tolerance = opt.tolerance;
  report.sequences.resize(opt.n_sequences);
  // Sequences are sampled up front (cheap) so cells can run on any worker.
  std::vector<std::vector<SequenceOp>> all_ops(opt.n_sequences);
  for (int i = 0; i < opt.n_sequences; ++i) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
    all_ops[i] = detail::sample_sequence(rng, opt);
  }
  detail::parallel_for(opt.n_sequences, opt.workers, [&](int i) {
    report.sequences[i] = check_sequence(all_ops[i], opt);
    report.sequences[i].index = i;
  });
  bool all_converged = true;
  for (const auto& s : report.sequences) {
    all_converged = all_converged && s.converged;
    report.max_cov_residual = std::max(report.max_cov_residual, s.cov_residual);
    report.max_renyi_residual = std::max(report.max_renyi_residual, s.renyi_residual);
  }
  report.limits = check_channel_limits(derive_seed(opt.seed, 0xfeedULL));
  report.pass = all_converged && report.max_cov_residual < opt.tolerance &&
                report.max_renyi_residual < opt.tolerance &&
                report.limits.beta_inf_residual < 1e-6 &&
                report.limits.semigroup_residual < 1e-8;
  return report;
}

}  // namespace cvsim

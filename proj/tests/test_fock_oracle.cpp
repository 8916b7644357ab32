#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cvsim/channels.hpp"
#include "cvsim/fock_oracle.hpp"
#include "cvsim/gates.hpp"
#include "cvsim/gaussian_state.hpp"
#include "cvsim/verify.hpp"

using namespace cvsim;
using namespace cvsim::fock;
using Catch::Matchers::WithinAbs;

TEST_CASE("oracle vacuum") {
  const FockState v = oracle_vacuum(1, 10);
  REQUIRE_THAT(std::abs(v.amplitudes()(0)), WithinAbs(1.0, 0.0));
  REQUIRE_THAT(v.norm(), WithinAbs(1.0, 0.0));
  REQUIRE(max_tail_weight(v) == 0.0);
  REQUIRE((covariance_of(v) - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
          1e-14);
  REQUIRE_THROWS_AS(oracle_vacuum(4, 10), std::invalid_argument);
  REQUIRE_THROWS_AS(oracle_vacuum(1, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(oracle_vacuum(3, 400), std::invalid_argument);
}

TEST_CASE("two-mode squeezing populates |nn> with tanh^n / cosh weights") {
  const double r = 0.6;
  FockState st = oracle_vacuum(2, 40);
  oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, r, 0, 1});
  REQUIRE_THAT(st.norm(), WithinAbs(1.0, 1e-10));
  const int d = st.cutoff() + 1;
  for (int n = 0; n < 8; ++n) {
    const std::complex<double> amp = st.amplitudes()(n * d + n);
    const double want = std::pow(std::tanh(r), n) / std::cosh(r);
    REQUIRE_THAT(amp.real(), WithinAbs(want, 1e-10));
    REQUIRE_THAT(amp.imag(), WithinAbs(0.0, 1e-10));
    // Off-diagonal occupations stay empty.
    if (n > 0) REQUIRE_THAT(std::abs(st.amplitudes()(n * d)), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("phase rotation only rotates the phase of number states") {
  FockState st = oracle_vacuum(1, 10);
  st.amplitudes()(0) = 0.0;
  st.amplitudes()(1) = 1.0;  // |1>
  const double theta = 0.9;
  oracle_apply_unitary_in_place(st, {GateKind::PhaseRotation, theta, 0, 1});
  REQUIRE_THAT(std::abs(st.amplitudes()(1)), WithinAbs(1.0, 1e-14));
  REQUIRE_THAT(std::arg(st.amplitudes()(1)), WithinAbs(-theta, 1e-14));
}

TEST_CASE("beam splitter at phi = pi/2 swaps occupations") {
  FockState st = oracle_vacuum(2, 12);
  const int d = st.cutoff() + 1;
  st.amplitudes()(0) = 0.0;
  st.amplitudes()(1 * d + 0) = 1.0;  // |10>
  oracle_apply_unitary_in_place(st, {GateKind::BeamSplitter, std::numbers::pi / 2, 0, 1});
  REQUIRE_THAT(std::abs(st.amplitudes()(0 * d + 1)), WithinAbs(1.0, 1e-10));  // |01>
  REQUIRE_THAT(st.norm(), WithinAbs(1.0, 1e-10));
}

TEST_CASE("unitaries preserve the norm at converged cutoff") {
  FockState st = oracle_vacuum(2, 50);
  oracle_apply_unitary_in_place(st, {GateKind::Squeeze, 0.5, 0, 1});
  oracle_apply_unitary_in_place(st, {GateKind::BeamSplitter, 1.1, 0, 1});
  oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, 0.4, 0, 1});
  oracle_apply_unitary_in_place(st, {GateKind::PhaseRotation, 2.2, 1, 0});
  REQUIRE_THAT(st.norm(), WithinAbs(1.0, 1e-10));
  REQUIRE(max_tail_weight(st) < 1e-10);
}

TEST_CASE("all four gate symplectics match the oracle unitaries") {
  struct Case {
    GateOp op;
    int modes;
  };
  const Case cases[] = {
      {{GateKind::PhaseRotation, 0.7, 0, 1}, 1},
      {{GateKind::Squeeze, 0.45, 0, 1}, 1},
      {{GateKind::BeamSplitter, 1.3, 0, 1}, 2},
      {{GateKind::TwoModeSqueeze, 0.6, 0, 1}, 2},
  };
  for (const auto& c : cases) {
    // Start from a mildly squeezed, rotated state so the check is sensitive
    // to the sign conventions, not just the vacuum fixed point.
    FockState st = oracle_vacuum(c.modes, 60);
    GaussianState gs = vacuum_state(c.modes);
    const int m0[] = {0};
    oracle_apply_unitary_in_place(st, {GateKind::Squeeze, 0.3, 0, 1});
    gs.apply_symplectic_in_place(one_mode_squeeze(0.3), m0);
    oracle_apply_unitary_in_place(st, {GateKind::PhaseRotation, 0.4, 0, 1});
    gs.apply_symplectic_in_place(phase_rotation(0.4), m0);

    oracle_apply_unitary_in_place(st, c.op);
    if (c.modes == 1) {
      switch (c.op.kind) {
        case GateKind::PhaseRotation:
          gs.apply_symplectic_in_place(phase_rotation(c.op.param), m0);
          break;
        case GateKind::Squeeze:
          gs.apply_symplectic_in_place(one_mode_squeeze(c.op.param), m0);
          break;
        default:
          FAIL("unexpected one-mode gate");
      }
    } else {
      const int pair[] = {0, 1};
      if (c.op.kind == GateKind::BeamSplitter) {
        gs.apply_symplectic_in_place(beam_splitter(c.op.param), pair);
      } else {
        gs.apply_symplectic_in_place(two_mode_squeeze(c.op.param), pair);
      }
    }
    REQUIRE(max_tail_weight(st) < 1e-10);
    REQUIRE((covariance_of(st) - gs.covariance()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("two-mode squeeze matrix entries match oracle moments at r <= 1") {
  for (double r : {0.25, 0.6, 1.0}) {
    FockState st = oracle_vacuum(2, 60);
    oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, r, 0, 1});
    const int pair[] = {0, 1};
    const GaussianState gs = apply_symplectic(vacuum_state(2), two_mode_squeeze(r), pair);
    REQUIRE(max_tail_weight(st) < 1e-10);
    REQUIRE((covariance_of(st) - gs.covariance()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("relative quadrature variance of the two-mode squeezed state decays as e^{-2rt}") {
  // <(q1 - q2)^2> from both the engine covariance and the oracle; the decay
  // exponent is measured, not assumed.
  const double r = 0.4;
  const int pair[] = {0, 1};
  GaussianState gs = vacuum_state(2);
  FockState st = oracle_vacuum(2, 60);
  for (int t = 1; t <= 3; ++t) {
    gs.apply_symplectic_in_place(two_mode_squeeze(r), pair);
    oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, r, 0, 1});
    const auto& m = gs.covariance();
    const double engine_var = m(0, 0) + m(1, 1) - 2 * m(0, 1);
    const Eigen::MatrixXd oracle_cov = covariance_of(st);
    const double oracle_var = oracle_cov(0, 0) + oracle_cov(1, 1) - 2 * oracle_cov(0, 1);
    REQUIRE_THAT(engine_var, WithinAbs(std::exp(-2.0 * r * t), 1e-10));
    REQUIRE_THAT(oracle_var, WithinAbs(std::exp(-2.0 * r * t), 1e-7));
  }
}

TEST_CASE("oracle projection onto |0>") {
  FockState bell = oracle_vacuum(2, 8);
  const int d = bell.cutoff() + 1;
  bell.amplitudes()(0) = 1.0 / std::sqrt(2.0);
  bell.amplitudes()(1 * d + 1) = 1.0 / std::sqrt(2.0);  // (|00> + |11>)/sqrt(2)
  oracle_project_zero_in_place(bell, 1);
  REQUIRE_THAT(std::abs(bell.amplitudes()(0)), WithinAbs(1.0, 1e-12));

  FockState tms = oracle_vacuum(2, 40);
  oracle_apply_unitary_in_place(tms, {GateKind::TwoModeSqueeze, 0.7, 0, 1});
  oracle_project_zero_in_place(tms, 1);
  const int region[] = {0};
  REQUIRE_THAT(oracle_renyi2(tms, region), WithinAbs(0.0, 1e-10));
}

TEST_CASE("oracle imaginary-time gate suppresses levels by e^{-beta n}") {
  FockState st = oracle_vacuum(1, 8);
  st.amplitudes()(0) = 1.0 / std::sqrt(2.0);
  st.amplitudes()(1) = 1.0 / std::sqrt(2.0);
  const FockState same = oracle_imaginary(st, 0, 0.0);
  REQUIRE((same.amplitudes() - st.amplitudes()).norm() < 1e-14);
  const double beta = 0.8;
  const FockState damped = oracle_imaginary(st, 0, beta);
  REQUIRE_THAT(std::abs(damped.amplitudes()(1) / damped.amplitudes()(0)),
               WithinAbs(std::exp(-beta), 1e-12));
}

TEST_CASE("imaginary-time channel matches the oracle on a squeezed state") {
  const double r = 0.8, beta = 0.5;
  const int m0[] = {0};
  FockState st = oracle_vacuum(1, 80);
  oracle_apply_unitary_in_place(st, {GateKind::Squeeze, r, 0, 1});
  oracle_imaginary_in_place(st, 0, beta);

  GaussianState gs = apply_symplectic(vacuum_state(1), one_mode_squeeze(r), m0);
  gs = imaginary_time_number(gs, BetaGate{beta, 0});
  REQUIRE(max_tail_weight(st) < 1e-10);
  REQUIRE((covariance_of(st) - gs.covariance()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("oracle renyi-2 of a two-mode squeezed arm equals ln cosh 2r") {
  for (double r : {0.3, 0.8}) {
    FockState st = oracle_vacuum(2, 80);
    oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, r, 0, 1});
    const int region[] = {0};
    REQUIRE(max_tail_weight(st) < 1e-10);
    REQUIRE_THAT(oracle_renyi2(st, region),
                 WithinAbs(std::log(std::cosh(2 * r)), 1e-8));
  }
}

TEST_CASE("oracle renyi-3 cross-checks the Gaussian spectrum formula") {
  const double rt = 0.8;
  FockState st = oracle_vacuum(2, 80);
  oracle_apply_unitary_in_place(st, {GateKind::TwoModeSqueeze, rt, 0, 1});
  const int region[] = {0};
  const double from_oracle = oracle_renyi_alpha(st, region, 3.0);
  const double nu = 0.5 * std::cosh(2 * rt);
  const double from_formula =
      0.5 * std::log(std::pow(nu + 0.5, 3.0) - std::pow(nu - 0.5, 3.0));
  REQUIRE_THAT(from_oracle, WithinAbs(from_formula, 1e-7));
}

TEST_CASE("gaussianity witness: density-matrix S2 equals the covariance formula") {
  // States built from the gate set, projections, and beta-gates must satisfy
  // the Gaussian entropy formula applied to their own measured covariance.
  VerifyOptions opt;
  opt.n_sequences = 12;
  opt.seed = 99;
  opt.workers = 1;
  const VerifyReport report = run_verify(opt);
  for (const auto& s : report.sequences) {
    REQUIRE(s.converged);
    REQUIRE(s.renyi_residual < 1e-5);
  }
}

TEST_CASE("doubling the cutoff does not move converged quantities") {
  FockState coarse = oracle_vacuum(2, 30);
  FockState fine = oracle_vacuum(2, 60);
  for (auto* st : {&coarse, &fine}) {
    oracle_apply_unitary_in_place(*st, {GateKind::TwoModeSqueeze, 0.5, 0, 1});
    oracle_apply_unitary_in_place(*st, {GateKind::BeamSplitter, 0.9, 0, 1});
    oracle_apply_unitary_in_place(*st, {GateKind::Squeeze, 0.4, 1, 0});
  }
  REQUIRE((covariance_of(coarse) - covariance_of(fine)).cwiseAbs().maxCoeff() < 1e-8);
  const int region[] = {0};
  REQUIRE_THAT(oracle_renyi2(coarse, region), WithinAbs(oracle_renyi2(fine, region), 1e-8));
}

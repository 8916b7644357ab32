#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cvsim/circuit.hpp"
#include "cvsim/experiments.hpp"
#include "cvsim/pure_frame.hpp"
#include "support/generators.hpp"

using namespace cvsim;
using Catch::Matchers::WithinAbs;

TEST_CASE("frame and covariance representations agree at shallow depth") {
  Rng rng(71);
  PureFrame frame(4);
  GaussianState state = vacuum_state(4);
  for (int g = 0; g < 30; ++g) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = rng.uniform();
    const int site = static_cast<int>(rng.below(4));
    const Eigen::Matrix2d local =
        one_mode_squeeze(r).matrix() * phase_rotation(theta).matrix();
    frame.apply_one_mode(local, site);
    const int m1[] = {site};
    state.apply_symplectic_in_place(
        SymplecticMatrix::checked(local, 1e-10), m1);

    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const int bond = static_cast<int>(rng.below(3));
    frame.apply_bond_rotation(phi, bond, bond + 1);
    const int m2[] = {bond, bond + 1};
    state.apply_symplectic_in_place(beam_splitter(phi), m2);
  }
  REQUIRE((frame.to_state().covariance() - state.covariance()).cwiseAbs().maxCoeff() <
          1e-9);
  for (int cut : {1, 2, 3}) {
    std::vector<int> region;
    for (int i = 0; i < cut; ++i) region.push_back(i);
    REQUIRE_THAT(frame.region_renyi2(cut),
                 WithinAbs(renyi_entropy(state, region, 2.0).value, 1e-8));
  }
}

TEST_CASE("config validation") {
  CircuitConfig cfg;
  cfg.sites = 7;  // odd without explicit cut
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.cut = 3;
  REQUIRE_NOTHROW(cfg.validate());
  cfg.measure_prob = 1.5;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("p = 1 vacuum projection resets every step") {
  CircuitConfig cfg;
  cfg.sites = 6;
  cfg.steps = 5;
  cfg.measure_prob = 1.0;
  cfg.seed = 5;
  const TrajectoryRecord rec = run_trajectory(cfg);
  for (double s2 : rec.series) REQUIRE_THAT(s2, WithinAbs(0.0, 1e-9));
}

TEST_CASE("one unitary step on two modes entangles them") {
  CircuitConfig cfg;
  cfg.sites = 2;
  cfg.steps = 1;
  cfg.measure_prob = 0.0;
  cfg.parity = ParityPolicy::EvenFirst;  // the 2-site chain's only bond is even
  cfg.seed = 8;
  const TrajectoryRecord rec = run_trajectory(cfg);
  REQUIRE_THAT(rec.series[0], WithinAbs(0.0, 1e-12));
  REQUIRE(rec.series[1] > 1e-4);
}

TEST_CASE("trajectories are deterministic in the seed") {
  CircuitConfig cfg;
  cfg.sites = 8;
  cfg.steps = 20;
  cfg.measure_prob = 0.3;
  cfg.seed = 99;
  const TrajectoryRecord a = run_trajectory(cfg);
  const TrajectoryRecord b = run_trajectory(cfg);
  REQUIRE(a.series == b.series);
  REQUIRE(a.first_parity == b.first_parity);
}

TEST_CASE("beta = 0 channel reproduces the unitary circuit bitwise") {
  CircuitConfig unitary;
  unitary.sites = 8;
  unitary.steps = 15;
  unitary.measure_prob = 0.0;
  unitary.channel = ChannelKind::VacuumProjection;
  unitary.seed = 123;

  CircuitConfig beta = unitary;
  beta.channel = ChannelKind::BetaGate;
  beta.beta = 0.0;
  beta.measure_prob = 1.0;

  const TrajectoryRecord a = run_trajectory(unitary);
  const TrajectoryRecord b = run_trajectory(beta);
  REQUIRE(a.series == b.series);
}

TEST_CASE("covariance and frame runners agree on short unitary circuits") {
  CircuitConfig cfg;
  cfg.sites = 6;
  cfg.steps = 12;
  cfg.measure_prob = 0.0;
  cfg.seed = 321;
  const TrajectoryRecord frame_run = run_trajectory(cfg);  // dispatches to the frame

  // Covariance route, replayed manually with the same plans.
  Rng rng(cfg.seed);
  const int first_parity = first_parity_for(cfg, rng);
  REQUIRE(first_parity == frame_run.first_parity);
  GaussianState state = GaussianState::vacuum(cfg.sites);
  std::vector<int> region{0, 1, 2};
  std::vector<double> series{renyi_entropy(state, region, 2.0).value};
  for (int t = 0; t < cfg.steps; ++t) {
    state = run_step(state, cfg, rng, t, first_parity);
    series.push_back(renyi_entropy(state, region, 2.0).value);
  }
  REQUIRE(series.size() == frame_run.series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    REQUIRE_THAT(series[t], WithinAbs(frame_run.series[t], 1e-7));
  }
}

TEST_CASE("purity holds along measured trajectories") {
  CircuitConfig cfg;
  cfg.sites = 10;
  cfg.steps = 40;
  cfg.measure_prob = 0.3;
  cfg.seed = 17;
  cfg.track_purity = true;
  const TrajectoryRecord rec = run_trajectory(cfg);
  REQUIRE(rec.max_purity_defect < 1e-8);
}

TEST_CASE("parity policies fix or mix the first bond layer") {
  CircuitConfig cfg;
  cfg.sites = 8;
  cfg.steps = 1;
  cfg.measure_prob = 0.2;
  cfg.parity = ParityPolicy::OddFirst;
  cfg.seed = 3;
  REQUIRE(run_trajectory(cfg).first_parity == 1);
  cfg.parity = ParityPolicy::EvenFirst;
  REQUIRE(run_trajectory(cfg).first_parity == 0);

  cfg.parity = ParityPolicy::RandomEqualMix;
  int odd = 0;
  for (int k = 0; k < 200; ++k) {
    cfg.seed = derive_seed(1000, k);
    odd += run_trajectory(cfg).first_parity;
  }
  REQUIRE(odd > 60);
  REQUIRE(odd < 140);
}

TEST_CASE("ensemble summaries are worker-count independent") {
  CircuitConfig cfg;
  cfg.sites = 8;
  cfg.steps = 10;
  cfg.measure_prob = 0.2;
  cfg.seed = 42;
  const EnsembleSummary one = run_ensemble(cfg, 12, 1);
  const EnsembleSummary four = run_ensemble(cfg, 12, 4);
  REQUIRE(one.mean == four.mean);
  REQUIRE(one.stderr_ == four.stderr_);
  REQUIRE(one.count_even_first == four.count_even_first);
}

TEST_CASE("single-trajectory ensemble has zero stderr") {
  CircuitConfig cfg;
  cfg.sites = 6;
  cfg.steps = 5;
  cfg.measure_prob = 0.5;
  cfg.seed = 7;
  const EnsembleSummary s = run_ensemble(cfg, 1, 1);
  REQUIRE(s.n_traj == 1);
  for (double e : s.stderr_) REQUIRE(e == 0.0);
  const CircuitConfig traj_cfg = [&] {
    CircuitConfig c = cfg;
    c.seed = derive_seed(cfg.seed, 0);
    return c;
  }();
  REQUIRE(s.mean == run_trajectory(traj_cfg).series);
}

TEST_CASE("stderr shrinks like 1/sqrt(n)") {
  CircuitConfig cfg;
  cfg.sites = 12;
  cfg.steps = 40;
  cfg.measure_prob = 0.3;
  cfg.seed = 1234;
  const auto records_small = run_trajectories(cfg, 50, 2);
  cfg.seed = 4321;
  const auto records_big = run_trajectories(cfg, 200, 2);
  const MeanStderr small = saturation_estimate(records_small, 31, 40);
  const MeanStderr big = saturation_estimate(records_big, 31, 40);
  const double ratio = small.stderr_ / big.stderr_;  // expect ~2
  REQUIRE(ratio > 1.4);
  REQUIRE(ratio < 2.9);
}

TEST_CASE("unbounded growth without measurements: S2 keeps rising") {
  CircuitConfig cfg;
  cfg.sites = 16;
  cfg.steps = 60;
  cfg.measure_prob = 0.0;
  cfg.seed = 5150;
  const auto records = run_trajectories(cfg, 24, 2);
  std::vector<double> at_30, at_60;
  for (const auto& r : records) {
    at_30.push_back(r.series[30]);
    at_60.push_back(r.series[60]);
  }
  const MeanStderr m30 = mean_stderr(at_30);
  const MeanStderr m60 = mean_stderr(at_60);
  const double gap = m60.mean - m30.mean;
  const double sigma = std::sqrt(m30.stderr_ * m30.stderr_ + m60.stderr_ * m60.stderr_);
  REQUIRE(gap > 5.0 * sigma);
}

TEST_CASE("beta channel saturation decreases with beta (small scale)") {
  auto saturation = [](double beta) {
    CircuitConfig cfg;
    cfg.sites = 8;
    cfg.steps = 60;
    cfg.measure_prob = 1.0;
    cfg.channel = ChannelKind::BetaGate;
    cfg.beta = beta;
    cfg.seed = 2718;
    const auto records = run_trajectories(cfg, 40, 2);
    return saturation_estimate(records, 46, 60);
  };
  const MeanStderr weak = saturation(0.1);
  const MeanStderr strong = saturation(1.0);
  const double sigma =
      std::sqrt(weak.stderr_ * weak.stderr_ + strong.stderr_ * strong.stderr_);
  REQUIRE(weak.mean - strong.mean > 2.0 * sigma);
}

TEST_CASE("run_step rejects mismatched state") {
  CircuitConfig cfg;
  cfg.sites = 4;
  Rng rng(1);
  GaussianState wrong = vacuum_state(3);
  REQUIRE_THROWS_AS(run_step(wrong, cfg, rng, 0, 0), std::invalid_argument);
}

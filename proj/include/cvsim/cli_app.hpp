#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cvsim/config.hpp"
#include "cvsim/experiments.hpp"
#include "cvsim/json_io.hpp"
#include "cvsim/verify.hpp"
#include "cvsim/version.hpp"

// CLI front end. Subcommands: unitary-growth, measured-circuit, beta-circuit,
// clifford-mi, verify. Every command is a pure function of (config file, flag
// overrides, master seed): the data outputs are byte-identical across reruns
// and worker counts. manifest.json echoes the fully resolved configuration
// (plus wall time, the one non-reproducible field) and can be passed back via
// --config to reproduce a run.
//
// Exit codes: 0 success, 1 configuration error, 2 verification failure.

namespace cvsim::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = "out";
};

struct LoadedConfig {
  KvMap command_kv;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

inline LoadedConfig load_config(const std::string& path, const std::string& command) {
  LoadedConfig lc;
  if (path.empty()) return lc;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // A manifest written by a previous run.
    ordered_json m;
    try {
      m = ordered_json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError("cannot parse manifest " + path + ": " + e.what());
    }
    if (!m.contains("command") || !m["command"].is_string()) {
      throw ConfigError("manifest " + path + " has no command field");
    }
    if (m["command"].get<std::string>() != command) {
      throw ConfigError("manifest " + path + " is for command '" +
                        m["command"].get<std::string>() + "', not '" + command + "'");
    }
    if (m.contains("config")) {
      for (const auto& [key, value] : m["config"].items()) {
        lc.command_kv[key] = value.get<std::string>();
      }
    }
    if (m.contains("seed")) lc.seed = m["seed"].get<std::uint64_t>();
    if (m.contains("workers")) lc.workers = m["workers"].get<int>();
    return lc;
  }
  std::stringstream ini_stream(text);
  const IniFile ini = parse_ini(ini_stream);
  if (const KvMap* kv = ini.section(command)) lc.command_kv = *kv;
  if (const KvMap* run = ini.section("run")) {
    ParamReader r(*run, "run");
    const std::uint64_t seed = r.get_u64("seed", 0);
    const int workers = r.get_int("workers", 0);
    r.finish();
    if (run->count("seed")) lc.seed = seed;
    if (run->count("workers")) lc.workers = workers;
  }
  return lc;
}

inline std::uint64_t resolve_seed(const CommonArgs& args, const LoadedConfig& lc) {
  if (args.seed) return *args.seed;
  if (lc.seed) return *lc.seed;
  return 1;
}

inline int resolve_workers(const CommonArgs& args, const LoadedConfig& lc) {
  int w = 0;
  if (args.workers) {
    w = *args.workers;
  } else if (lc.workers) {
    w = *lc.workers;
  }
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, w);
}

// ---------------------------------------------------------------------------
// Output helpers

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string series_csv(const EnsembleSummary& s) {
  std::string text = "t,mean_S2,stderr,n_traj\n";
  for (std::size_t t = 0; t < s.mean.size(); ++t) {
    text += std::to_string(t) + "," + format_double(s.mean[t]) + "," +
            format_double(s.stderr_[t]) + "," + std::to_string(s.n_traj) + "\n";
  }
  return text;
}

inline std::string trajectories_json_text(const std::vector<TrajectoryRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

inline std::string clifford_csv(const std::vector<CliffordMiRow>& rows) {
  std::string text = "N,p,mean_I_AB,stderr,n_samples\n";
  for (const auto& r : rows) {
    text += std::to_string(r.cluster_size) + "," + format_double(r.p) + "," +
            format_double(r.mean) + "," + format_double(r.stderr_) + "," +
            std::to_string(r.samples) + "\n";
  }
  return text;
}

struct RunContext {
  std::string command;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  KvMap resolved;  // canonical echo of every command parameter
  std::vector<std::string> outputs;
  std::map<std::string, std::string> csv_schemas;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& name, const std::string& text,
            const std::string& schema = "") {
    write_text_file(out_dir / name, text);
    outputs.push_back(name);
    if (!schema.empty()) csv_schemas[name] = schema;
  }

  void write_manifest() {
    ordered_json m;
    m["schema"] = "cvsim.manifest.v1";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = seed;
    m["workers"] = workers;
    ordered_json cfg = ordered_json::object();
    for (const auto& [key, value] : resolved) cfg[key] = value;
    m["config"] = cfg;
    m["outputs"] = outputs;
    ordered_json schemas = ordered_json::object();
    for (const auto& [name, schema] : csv_schemas) schemas[name] = schema;
    m["csv_schema"] = schemas;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
  }
};

inline RunContext make_context(const std::string& command, const CommonArgs& args,
                               const LoadedConfig& lc) {
  RunContext ctx;
  ctx.command = command;
  ctx.out_dir = args.out_dir;
  ctx.seed = resolve_seed(args, lc);
  ctx.workers = resolve_workers(args, lc);
  fs::create_directories(ctx.out_dir);
  return ctx;
}

inline ordered_json summary_header(const RunContext& ctx) {
  ordered_json j;
  j["schema"] = "cvsim.summary.v1";
  j["command"] = ctx.command;
  j["seed"] = ctx.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_unitary_growth(const CommonArgs& args) {
  const LoadedConfig lc = load_config(args.config_path, "unitary-growth");
  ParamReader r(lc.command_kv, "unitary-growth");
  UnitaryGrowthParams p;
  p.sites = r.get_int("L", 64);
  p.steps = r.get_int("T", 200);
  p.n_traj = r.get_int("n_traj", 100);
  p.parity = r.get_parity("parity", ParityPolicy::RandomEqualMix);
  p.cut = r.get_int("cut", -1);
  p.early_lo = r.get_int("early_lo", 3);
  p.early_hi = r.get_int("early_hi", 12);
  p.late_lo = r.get_int("late_lo", -1);
  const bool dump_traj = r.get_int("dump_trajectories", 0) != 0;
  r.finish();

  RunContext ctx = make_context("unitary-growth", args, lc);
  p.seed = ctx.seed;
  p.workers = ctx.workers;
  ctx.resolved = {{"L", std::to_string(p.sites)},
                  {"T", std::to_string(p.steps)},
                  {"n_traj", std::to_string(p.n_traj)},
                  {"parity", parity_name(p.parity)},
                  {"cut", std::to_string(p.cut)},
                  {"early_lo", std::to_string(p.early_lo)},
                  {"early_hi", std::to_string(p.early_hi)},
                  {"late_lo", std::to_string(p.late_lo)},
                  {"dump_trajectories", dump_traj ? "1" : "0"}};

  const UnitaryGrowthResult res = run_unitary_growth(p);
  ctx.emit("series.csv", series_csv(res.summary), "t,mean_S2,stderr,n_traj");
  ctx.emit("ensemble.json", to_json(res.summary).dump(2) + "\n");
  if (dump_traj) ctx.emit("trajectories.json", trajectories_json_text(res.records));

  ordered_json j = summary_header(ctx);
  j["L"] = p.sites;
  j["T"] = p.steps;
  j["n_traj"] = res.summary.n_traj;
  j["parity_counts"] = {{"even_first", res.summary.count_even_first},
                        {"odd_first", res.summary.count_odd_first}};
  j["early_window"] = {p.early_lo, p.early_hi};
  j["early_loglog_slope"] =
      res.early_loglog ? ordered_json(res.early_loglog->slope) : ordered_json(nullptr);
  j["late_window"] = {res.late_lo, p.steps};
  if (res.late_linear) {
    j["late_slope"] = res.late_linear->slope;
    j["late_intercept"] = res.late_linear->intercept;
    j["late_r2"] = res.late_linear->r2;
  } else {
    j["late_slope"] = nullptr;
    j["late_intercept"] = nullptr;
    j["late_r2"] = nullptr;
  }
  j["final_mean_S2"] = res.summary.mean.back();
  ctx.emit("summary.json", j.dump(2) + "\n");
  ctx.write_manifest();
  return 0;
}

inline int cmd_measured_circuit(const CommonArgs& args) {
  const LoadedConfig lc = load_config(args.config_path, "measured-circuit");
  ParamReader r(lc.command_kv, "measured-circuit");
  MeasuredCircuitParams p;
  p.p = r.get_double("p", 0.2);
  p.sites_list = r.get_int_list("L_list", {16, 32, 64});
  p.steps = r.get_int("T", 200);
  p.n_traj = r.get_int("n_traj", 200);
  p.parity = r.get_parity("parity", ParityPolicy::RandomEqualMix);
  r.finish();

  RunContext ctx = make_context("measured-circuit", args, lc);
  p.seed = ctx.seed;
  p.workers = ctx.workers;
  ctx.resolved = {{"p", format_double(p.p)},
                  {"L_list", format_int_list(p.sites_list)},
                  {"T", std::to_string(p.steps)},
                  {"n_traj", std::to_string(p.n_traj)},
                  {"parity", parity_name(p.parity)}};

  const MeasuredCircuitResult res = run_measured_circuit(p);
  ordered_json j = summary_header(ctx);
  j["p"] = p.p;
  j["T"] = p.steps;
  j["n_traj"] = p.n_traj;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : res.cells) {
    const std::string name = "series_L" + std::to_string(cell.sites) + ".csv";
    ctx.emit(name, series_csv(cell.summary), "t,mean_S2,stderr,n_traj");
    ctx.emit("ensemble_L" + std::to_string(cell.sites) + ".json",
             to_json(cell.summary).dump(2) + "\n");
    cells.push_back({{"L", cell.sites},
                     {"saturation_mean", cell.saturation.mean},
                     {"saturation_stderr", cell.saturation.stderr_},
                     {"window", {cell.window_lo, p.steps}},
                     {"series_file", name}});
  }
  j["cells"] = cells;
  ordered_json pairs = ordered_json::array();
  for (std::size_t a = 0; a < res.cells.size(); ++a) {
    for (std::size_t b = a + 1; b < res.cells.size(); ++b) {
      const auto& ca = res.cells[a];
      const auto& cb = res.cells[b];
      const double diff = std::abs(ca.saturation.mean - cb.saturation.mean);
      const double comb = std::sqrt(ca.saturation.stderr_ * ca.saturation.stderr_ +
                                    cb.saturation.stderr_ * cb.saturation.stderr_);
      pairs.push_back({{"L_a", ca.sites},
                       {"L_b", cb.sites},
                       {"abs_difference", diff},
                       {"combined_stderr", comb},
                       {"within_3_sigma", diff <= 3.0 * comb}});
    }
  }
  j["pairwise_saturation"] = pairs;
  ctx.emit("summary.json", j.dump(2) + "\n");
  ctx.write_manifest();
  return 0;
}

inline int cmd_beta_circuit(const CommonArgs& args) {
  const LoadedConfig lc = load_config(args.config_path, "beta-circuit");
  ParamReader r(lc.command_kv, "beta-circuit");
  BetaCircuitParams p;
  p.betas = r.get_double_list("beta_list", {0.1, 0.3, 1.0});
  p.sites_list = r.get_int_list("L_list", {16, 32});
  p.steps = r.get_int("T", 200);
  p.n_traj = r.get_int("n_traj", 200);
  p.parity = r.get_parity("parity", ParityPolicy::RandomEqualMix);
  r.finish();

  RunContext ctx = make_context("beta-circuit", args, lc);
  p.seed = ctx.seed;
  p.workers = ctx.workers;
  ctx.resolved = {{"beta_list", format_double_list(p.betas)},
                  {"L_list", format_int_list(p.sites_list)},
                  {"T", std::to_string(p.steps)},
                  {"n_traj", std::to_string(p.n_traj)},
                  {"parity", parity_name(p.parity)}};

  const BetaCircuitResult res = run_beta_circuit(p);
  ordered_json j = summary_header(ctx);
  j["T"] = p.steps;
  j["n_traj"] = p.n_traj;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : res.cells) {
    char beta_txt[32];
    std::snprintf(beta_txt, sizeof(beta_txt), "%g", cell.beta);
    const std::string name =
        "series_beta" + std::string(beta_txt) + "_L" + std::to_string(cell.sites) + ".csv";
    ctx.emit(name, series_csv(cell.summary), "t,mean_S2,stderr,n_traj");
    ctx.emit("ensemble_beta" + std::string(beta_txt) + "_L" + std::to_string(cell.sites) +
                 ".json",
             to_json(cell.summary).dump(2) + "\n");
    cells.push_back({{"beta", cell.beta},
                     {"L", cell.sites},
                     {"saturation_mean", cell.saturation.mean},
                     {"saturation_stderr", cell.saturation.stderr_},
                     {"window", {cell.window_lo, p.steps}},
                     {"series_file", name}});
  }
  j["cells"] = cells;
  // Saturation ordering across beta at fixed L.
  ordered_json order = ordered_json::array();
  for (int sites : p.sites_list) {
    std::vector<const BetaCell*> at_l;
    for (const auto& c : res.cells) {
      if (c.sites == sites) at_l.push_back(&c);
    }
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < at_l.size(); ++i) {
      if (!(at_l[i]->saturation.mean > at_l[i + 1]->saturation.mean)) decreasing = false;
    }
    order.push_back({{"L", sites}, {"saturation_decreasing_in_beta", decreasing}});
  }
  j["beta_ordering"] = order;
  ctx.emit("summary.json", j.dump(2) + "\n");
  ctx.write_manifest();
  return 0;
}

inline int cmd_clifford_mi(const CommonArgs& args) {
  const LoadedConfig lc = load_config(args.config_path, "clifford-mi");
  ParamReader r(lc.command_kv, "clifford-mi");
  CliffordMiParams p;
  p.sites = r.get_int("L", 64);
  p.cluster_sizes = r.get_int_list("N_list", {1, 2});
  p.p_min = r.get_double("p_min", 0.02);
  p.p_max = r.get_double("p_max", 0.50);
  p.dp = r.get_double("dp", 0.02);
  p.samples = r.get_int("samples", 24);
  p.region_len = r.get_int("region_len", 4);
  r.finish();

  RunContext ctx = make_context("clifford-mi", args, lc);
  p.seed = ctx.seed;
  p.workers = ctx.workers;
  ctx.resolved = {{"L", std::to_string(p.sites)},
                  {"N_list", format_int_list(p.cluster_sizes)},
                  {"p_min", format_double(p.p_min)},
                  {"p_max", format_double(p.p_max)},
                  {"dp", format_double(p.dp)},
                  {"samples", std::to_string(p.samples)},
                  {"region_len", std::to_string(p.region_len)}};

  const CliffordMiResult res = run_clifford_mi(p);
  ctx.emit("mi_table.csv", clifford_csv(res.rows), "N,p,mean_I_AB,stderr,n_samples");
  ordered_json j = summary_header(ctx);
  j["L"] = p.sites;
  j["samples"] = p.samples;
  ordered_json peaks = ordered_json::object();
  for (const auto& [n, peak] : res.peak_p) peaks[std::to_string(n)] = peak;
  j["peak_p_by_N"] = peaks;
  ctx.emit("summary.json", j.dump(2) + "\n");
  ctx.write_manifest();
  return 0;
}

inline int cmd_verify(const CommonArgs& args) {
  const LoadedConfig lc = load_config(args.config_path, "verify");
  ParamReader r(lc.command_kv, "verify");
  VerifyOptions opt;
  opt.n_sequences = r.get_int("n_sequences", 200);
  opt.min_ops = r.get_int("min_ops", 4);
  opt.max_ops = r.get_int("max_ops", 10);
  opt.squeeze_budget = r.get_double("squeeze_budget", 1.3);
  opt.tolerance = r.get_double("tolerance", 1e-5);
  r.finish();

  RunContext ctx = make_context("verify", args, lc);
  opt.seed = ctx.seed;
  opt.workers = ctx.workers;
  ctx.resolved = {{"n_sequences", std::to_string(opt.n_sequences)},
                  {"min_ops", std::to_string(opt.min_ops)},
                  {"max_ops", std::to_string(opt.max_ops)},
                  {"squeeze_budget", format_double(opt.squeeze_budget)},
                  {"tolerance", format_double(opt.tolerance)}};

  const VerifyReport report = run_verify(opt);
  ordered_json j = summary_header(ctx);
  j["n_sequences"] = opt.n_sequences;
  j["tolerance"] = opt.tolerance;
  j["max_covariance_residual"] = report.max_cov_residual;
  j["max_renyi2_residual"] = report.max_renyi_residual;
  j["beta_limit_residual"] = report.limits.beta_inf_residual;
  j["semigroup_residual"] = report.limits.semigroup_residual;
  j["pass"] = report.pass;
  ordered_json seq = ordered_json::array();
  for (const auto& s : report.sequences) {
    seq.push_back({{"index", s.index},
                   {"n_ops", s.n_ops},
                   {"cutoff", s.cutoff},
                   {"converged", s.converged},
                   {"tail_weight", s.tail},
                   {"covariance_residual", s.cov_residual},
                   {"renyi2_residual", s.renyi_residual}});
  }
  j["sequences"] = seq;
  ctx.emit("verify_report.json", j.dump(2) + "\n");
  ctx.write_manifest();
  std::cout << "verify: " << (report.pass ? "PASS" : "FAIL")
            << " (max covariance residual " << report.max_cov_residual
            << ", max Renyi-2 residual " << report.max_renyi_residual << ")\n";
  return report.pass ? 0 : 2;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"hybrid continuous-variable Gaussian circuit simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config_path,
                    "INI config file, or a manifest.json to reproduce a run");
    sub->add_option("--seed", args.seed, "master seed (overrides config)");
    sub->add_option("--workers", args.workers, "worker threads (never changes results)");
    sub->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  };

  CLI::App* unitary = app.add_subcommand(
      "unitary-growth", "entanglement growth of the p = 0 circuit");
  CLI::App* measured = app.add_subcommand(
      "measured-circuit", "area-law saturation with vacuum projections at rate p");
  CLI::App* beta = app.add_subcommand(
      "beta-circuit", "imaginary-time channel sweep at p = 1");
  CLI::App* clifford = app.add_subcommand(
      "clifford-mi", "clustered-qubit Clifford mutual-information sweep");
  CLI::App* verify = app.add_subcommand(
      "verify", "cross-check the Gaussian engine against the Fock-space verifier");
  for (CLI::App* sub : {unitary, measured, beta, clifford, verify}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (unitary->parsed()) return cmd_unitary_growth(args);
    if (measured->parsed()) return cmd_measured_circuit(args);
    if (beta->parsed()) return cmd_beta_circuit(args);
    if (clifford->parsed()) return cmd_clifford_mi(args);
    if (verify->parsed()) return cmd_verify(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("cvsim");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cvsim::cli

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvsim/cli_app.hpp"
#include "cvsim/config.hpp"

using namespace cvsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("ini parsing") {
  std::stringstream in(
      "# comment\n"
      "[run]\n"
      "seed = 77\n"
      "workers=3\n"
      "\n"
      "[unitary-growth]\n"
      "L = 16\n"
      "T = 12\n");
  const IniFile ini = parse_ini(in);
  REQUIRE(ini.section("run") != nullptr);
  REQUIRE(ini.section("run")->at("seed") == "77");
  REQUIRE(ini.section("run")->at("workers") == "3");
  REQUIRE(ini.section("unitary-growth")->at("L") == "16");
  REQUIRE(ini.section("nope") == nullptr);

  std::stringstream bad("[oops\n");
  REQUIRE_THROWS_AS(parse_ini(bad), ConfigError);
  std::stringstream bad2("novalue\n");
  REQUIRE_THROWS_AS(parse_ini(bad2), ConfigError);
}

TEST_CASE("param reader rejects unknown keys by name") {
  KvMap kv{{"L", "8"}, {"whoops", "1"}};
  ParamReader r(kv, "unitary-growth");
  REQUIRE(r.get_int("L", 4) == 8);
  try {
    r.finish();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("whoops") != std::string::npos);
    REQUIRE(std::string(e.what()).find("unitary-growth") != std::string::npos);
  }
}

TEST_CASE("param reader parses lists and enums") {
  KvMap kv{{"L_list", "16, 32,64"}, {"beta_list", "0.1,0.3"}, {"parity", "odd-first"}};
  ParamReader r(kv, "x");
  REQUIRE(r.get_int_list("L_list", {}) == std::vector<int>{16, 32, 64});
  REQUIRE(r.get_double_list("beta_list", {}) == std::vector<double>{0.1, 0.3});
  REQUIRE(r.get_parity("parity", ParityPolicy::EvenFirst) == ParityPolicy::OddFirst);
  r.finish();

  KvMap bad{{"parity", "sideways"}};
  ParamReader rb(bad, "x");
  REQUIRE_THROWS_AS(rb.get_parity("parity", ParityPolicy::EvenFirst), ConfigError);
}

TEST_CASE("unknown config keys make commands fail with exit code 1") {
  TempDir dir("cvsim_test_badcfg");
  const fs::path cfg = dir.path / "bad.ini";
  std::ofstream(cfg) << "[unitary-growth]\nL = 8\nbogus_key = 1\n";
  const int code = cli::run({"unitary-growth", "--config", cfg.string(), "--out",
                             (dir.path / "out").string()});
  REQUIRE(code == 1);
}

TEST_CASE("measured-circuit rejects p = 0") {
  TempDir dir("cvsim_test_p0");
  const fs::path cfg = dir.path / "cfg.ini";
  std::ofstream(cfg) << "[measured-circuit]\np = 0\nL_list = 4\nT = 4\nn_traj = 2\n";
  const int code = cli::run({"measured-circuit", "--config", cfg.string(), "--out",
                             (dir.path / "out").string()});
  REQUIRE(code == 1);
}

TEST_CASE("unitary-growth outputs reproduce from the manifest at any worker count") {
  TempDir dir("cvsim_test_repro");
  const fs::path cfg = dir.path / "cfg.ini";
  std::ofstream(cfg) << "[run]\nseed = 9\n\n[unitary-growth]\nL = 8\nT = 12\nn_traj = 6\n"
                        "early_lo = 2\nearly_hi = 6\nlate_lo = 4\n";
  const fs::path out1 = dir.path / "a";
  const fs::path out2 = dir.path / "b";
  REQUIRE(cli::run({"unitary-growth", "--config", cfg.string(), "--workers", "1",
                    "--out", out1.string()}) == 0);
  REQUIRE(cli::run({"unitary-growth", "--config", (out1 / "manifest.json").string(),
                    "--workers", "3", "--out", out2.string()}) == 0);
  REQUIRE(slurp(out1 / "series.csv") == slurp(out2 / "series.csv"));
  REQUIRE(slurp(out1 / "summary.json") == slurp(out2 / "summary.json"));
}

TEST_CASE("seed flag overrides the config file") {
  TempDir dir("cvsim_test_seedflag");
  const fs::path cfg = dir.path / "cfg.ini";
  std::ofstream(cfg) << "[run]\nseed = 9\n\n[unitary-growth]\nL = 6\nT = 6\nn_traj = 3\n"
                        "early_lo = 2\nearly_hi = 4\nlate_lo = 3\n";
  const fs::path out1 = dir.path / "a";
  const fs::path out2 = dir.path / "b";
  REQUIRE(cli::run({"unitary-growth", "--config", cfg.string(), "--out", out1.string()}) ==
          0);
  REQUIRE(cli::run({"unitary-growth", "--config", cfg.string(), "--seed", "10", "--out",
                    out2.string()}) == 0);
  REQUIRE(slurp(out1 / "series.csv") != slurp(out2 / "series.csv"));
}

TEST_CASE("manifests refuse to drive the wrong command") {
  TempDir dir("cvsim_test_wrongcmd");
  const fs::path manifest = dir.path / "m.json";
  std::ofstream(manifest) << R"({"schema":"cvsim.manifest.v1","command":"verify",)"
                          << R"("seed":1,"workers":1,"config":{}})";
  const int code = cli::run({"unitary-growth", "--config", manifest.string(), "--out",
                             (dir.path / "b").string()});
  REQUIRE(code == 1);
}

TEST_CASE("series csv matches the documented schema") {
  EnsembleSummary s;
  s.mean = {0.0, 1.5};
  s.stderr_ = {0.0, 0.25};
  s.n_traj = 4;
  REQUIRE(cli::series_csv(s) == "t,mean_S2,stderr,n_traj\n0,0,0,4\n1,1.5,0.25,4\n");
}

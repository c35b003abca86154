#include "doctest.h"

#include "opzosa/cli.hpp"
#include "opzosa/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace opzosa;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "opzosa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_test_work" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

const char* kSmallBench =
    "problem.kind = geomedian\n"
    "problem.n = 3\n"
    "problem.M = 3\n"
    "problem.lambda = 10\n"
    "problem.penalty_scale = half\n"
    "solver.N = 3\n"
    "solver.step_grid = 0.001, 0.01\n"
    "bench.topologies = star, chain\n"
    "bench.seeds = 0, 1\n";

}  // namespace

TEST_CASE("minimal config defaults to the desk problem") {
  const Config cfg = parse_config_text("problem.n=2\n");
  CHECK(cfg.kind == ProblemKind::desk);
  CHECK(cfg.dimension() == 2);
  CHECK(cfg.noise() == 0.0);
  CHECK(cfg.smoothing_radius() == 1e-3);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.desk().n == 2);
}

TEST_CASE("unknown keys are errors naming the key") {
  try {
    parse_config_text("probem.n = 2\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "probem.n");
    CHECK(std::string(e.what()).find("probem.n") != std::string::npos);
  }
  Config cfg;
  CHECK_THROWS_AS(apply_setting(cfg, "solver.nn", "3"), ConfigError);
}

TEST_CASE("bad values name their key") {
  const auto key_of = [](const std::string& text) {
    try {
      Config cfg = parse_config_text(text);
      cfg.validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("solver.N = ten\n") == "solver.N");
  CHECK(key_of("solver.N = 0\n") == "solver.N");
  CHECK(key_of("problem.sigma = -1\n") == "problem.sigma");
  CHECK(key_of("problem.topology = ring\n") == "problem.topology");
  CHECK(key_of("bench.algorithms = opzosa, sgd\n") == "bench.algorithms");
  CHECK(key_of("problem.kind = geomedian\n") == "problem.penalty_scale");
  CHECK(key_of("problem.kind = geomedian\nproblem.penalty_scale = half\n") == "<none>");
  CHECK(key_of("problem.n = 2\nproblem.f_center = 1, 2, 3\n") == "problem.f_center");
  CHECK(key_of("output.timing = maybe\n") == "output.timing");
  CHECK(key_of("no equals sign\n") != "<none>");
}

TEST_CASE("comments, blanks and lists") {
  const Config cfg = parse_config_text(
      "# comment\n\n"
      "problem.kind = geomedian   # trailing\n"
      "problem.penalty_scale = full\n"
      "bench.seeds = 3, 4,5\n"
      "bench.algorithms = md0\n"
      "solver.anchor = literal\n"
      "output.timing = true\n");
  CHECK(cfg.kind == ProblemKind::geomedian);
  CHECK(cfg.dimension() == 20);
  CHECK(cfg.noise() == 0.01);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(cfg.algorithms == std::vector<Algorithm>{Algorithm::md0});
  CHECK(cfg.anchor == GradientAnchor::previous_iterate);
  CHECK(cfg.timing);
  const auto exp = cfg.experiment();
  CHECK(exp.scale == PenaltyScale::full);
  CHECK(exp.N_outer == cfg.N);
  CHECK(exp.record_timing);
  CHECK(exp.seeds == cfg.seeds);
}

TEST_CASE("overrides beat the file, last write wins") {
  const fs::path dir = fresh_dir("overrides");
  const auto path = write_text(dir / "c.conf", "problem.n = 2\nsolver.N = 10\n");
  CHECK(load_config(path.string(), {}).N == 10);
  CHECK(load_config(path.string(), {"solver.N=20"}).N == 20);
  CHECK(load_config(path.string(), {"solver.N=20", "solver.N = 30"}).N == 30);
  CHECK_THROWS_AS(load_config(path.string(), {"solver.N"}), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "missing.conf").string(), {}), ConfigError);
  for (const auto& key : config_keys()) CHECK(key.find('.') != std::string::npos);
}

TEST_CASE("cli help and usage errors") {
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--config") != std::string::npos);
  CHECK(help.out.find("OPZOSA_OUT_DIR") != std::string::npos);

  const auto none = cli({});
  CHECK(none.code == 2);
  CHECK(none.err.rfind("error kind=usage", 0) == 0);
}

TEST_CASE("cli config errors are one machine-readable line") {
  const fs::path dir = fresh_dir("errors");
  const auto res = cli({"validate-config", "--set", "probem.n=2", "--out", dir.string()});
  CHECK(res.code == 1);
  CHECK(res.err == "error kind=config key=probem.n msg=\"unknown key\"\n");

  const auto missing = cli({"run", "--config", (dir / "nope.conf").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error kind=config", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  const auto desk_bench = cli({"bench", "--out", dir.string()});
  CHECK(desk_bench.code == 1);
  CHECK(desk_bench.err.find("key=problem.kind") != std::string::npos);

  const auto ok = cli({"validate-config", "--set", "problem.n=2"});
  CHECK(ok.code == 0);
  CHECK(ok.out == "ok kind=desk\n");
}

TEST_CASE("spectra writes matrices and sorted spectra") {
  const fs::path dir = fresh_dir("spectra");
  const auto res = cli({"spectra", "--topology", "complete", "--M", "3", "--out", dir.string()});
  REQUIRE(res.code == 0);
  CHECK(slurp(dir / "spectrum_complete_3.txt") == "0\n3\n3\n");
  CHECK(slurp(dir / "W_complete_3.txt") == "2 -1 -1\n-1 2 -1\n-1 -1 2\n");

  const auto all = cli({"spectra", "--M", "4", "--out", dir.string()});
  REQUIRE(all.code == 0);
  for (const char* t : {"star", "cycle", "chain", "complete"}) {
    CHECK(fs::exists(dir / (std::string("W_") + t + "_4.txt")));
    CHECK(fs::exists(dir / (std::string("spectrum_") + t + "_4.txt")));
  }
  CHECK(slurp(dir / "spectrum_star_4.txt") == "0\n1\n1\n4\n");
  CHECK(cli({"spectra", "--topology", "ring", "--out", dir.string()}).code == 2);
}

TEST_CASE("run writes a trace and is deterministic") {
  const fs::path a = fresh_dir("run_a");
  const fs::path b = fresh_dir("run_b");
  const std::vector<std::string> common = {"--set", "solver.N=5", "--set", "problem.sigma=0.01",
                                           "--seed", "3"};
  auto args_a = std::vector<std::string>{"run", "--out", a.string()};
  auto args_b = std::vector<std::string>{"run", "--out", b.string()};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  const auto ra = cli(args_a);
  const auto rb = cli(args_b);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  const auto files = tree(a);
  CHECK(files.size() == 2);
  CHECK(files.count("desk_opzosa_s3.csv") == 1);
  CHECK(files == tree(b));
  CHECK(files.at("desk_opzosa_s3.csv").rfind("run_id,algo,topology,seed,k,", 0) == 0);

  const auto md = cli({"run", "--out", a.string(), "--set", "solver.algo=md0", "--set",
                       "solver.N=30", "--set", "solver.step_grid=0.01,0.1"});
  REQUIRE(md.code == 0);
  CHECK(md.out.find("tuned step") != std::string::npos);
  CHECK(fs::exists(a / "desk_md0_s0.csv"));
}

TEST_CASE("bench writes one CSV per cell, deterministically") {
  const fs::path dir = fresh_dir("bench");
  const auto conf = write_text(dir / "small.conf", kSmallBench);
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  const auto ra = cli({"bench", "--config", conf.string(), "--out", out_a.string(), "--jobs", "1"});
  const auto rb = cli({"bench", "--config", conf.string(), "--out", out_b.string(), "--jobs", "3"});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  const auto files = tree(out_a);
  std::size_t csv_runs = 0;
  std::size_t plots = 0;
  for (const auto& [name, body] : files) {
    if (name.rfind("runs/", 0) == 0) ++csv_runs;
    if (name.rfind("plot/", 0) == 0) ++plots;
  }
  CHECK(csv_runs == 2 * 3 * 2);
  CHECK(plots == 2 * 3 * 2);
  CHECK(files.count("summary.csv") == 1);
  CHECK(files.count("tuning.csv") == 1);
  CHECK(files.at("tuning.csv").rfind("topology,algo,step,mean_final_gap,chosen\n", 0) == 0);
  CHECK(files == tree(out_b));

  const auto shifted = cli({"bench", "--config", conf.string(), "--out", (dir / "c").string(),
                            "--seed", "10", "--set", "bench.algorithms=opzosa"});
  REQUIRE(shifted.code == 0);
  CHECK(fs::exists(dir / "c" / "runs" / "star_opzosa_s10.csv"));
  CHECK(fs::exists(dir / "c" / "runs" / "chain_opzosa_s11.csv"));
}

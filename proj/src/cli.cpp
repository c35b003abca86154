#include "opzosa/cli.hpp"

#include "opzosa/config.hpp"
#include "opzosa/desk_problem.hpp"
#include "opzosa/geomedian.hpp"
#include "opzosa/network.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

namespace opzosa {

namespace {

namespace fs = std::filesystem;

constexpr const char* kOutDirEnv = "OPZOSA_OUT_DIR";

struct CliError {
  std::string kind;
  std::string key;
  std::string message;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + '"';
}

void report(std::ostream& err, const CliError& e) {
  err << "error kind=" << e.kind << " key=" << (e.key.empty() ? "-" : e.key)
      << " msg=" << quote(e.message) << '\n';
}

struct Common {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;

  fs::path out() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "out";
  }
  int workers() const {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw CliError{"io", "", "cannot create output directory '" + dir.string() + "'"};
  }
  return dir;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CliError{"io", "", "cannot write '" + path.string() + "'"};
  fn(os);
  os.flush();
  if (!os) throw CliError{"io", "", "failed writing '" + path.string() + "'"};
}

Config load(const Common& common) {
  Config cfg = load_config(common.config_path, common.overrides);
  if (common.seed) cfg.seed = *common.seed;
  return cfg;
}

struct PreparedRun {
  std::function<CompositeProblem()> make;
  GapProbe probe;
  std::string label;
};

PreparedRun prepare(const Config& cfg) {
  if (cfg.kind == ProblemKind::desk) {
    auto desk = std::make_shared<const DeskProblem>(cfg.desk());
    const double psi_star = desk->reference().psi_star;
    return {[desk] { return desk->make_problem(); },
            [desk, psi_star](const Vector& x) { return desk->objective(x) - psi_star; }, "desk"};
  }
  auto gp = std::make_shared<const GeomedianProblem>(
      generate_data(cfg.M, cfg.dimension(), cfg.data_seed),
      make_penalty(cfg.topology, cfg.lambda, cfg.M, cfg.penalty_scale.value_or(PenaltyScale::half)),
      cfg.noise(), cfg.smoothing_radius());
  const double psi_star = reference_solution(*gp, cfg.reference_tol).psi_star;
  return {[gp] { return gp->make_problem(); },
          [gp, psi_star](const Vector& x) { return gp->objective(x) - psi_star; }, cfg.topology};
}

int cmd_run(const Common& common, std::ostream& out) {
  const Config cfg = load(common);
  const PreparedRun prepared = prepare(cfg);
  const std::string algo(algorithm_name(cfg.algo));
  const std::string run_id = fmt::format("{}_{}_s{}", prepared.label, algo, cfg.seed);

  RunTrace trace;
  CompositeProblem problem = prepared.make();
  if (cfg.algo == Algorithm::opzosa) {
    SlidingOptions options;
    options.anchor = cfg.anchor;
    options.inner_cap = cfg.T_cap;
    options.seed = cfg.seed;
    options.record_timing = cfg.timing;
    trace = run_opzosa(problem, cfg.N, options, prepared.probe);
  } else {
    MdConfig md{.step = 1.0,
                .steps = cfg.md_steps > 0 ? cfg.md_steps : cfg.N,
                .variant = cfg.algo == Algorithm::md1 ? MdVariant::first_order
                                                      : MdVariant::zeroth_order,
                .r = cfg.smoothing_radius(),
                .seed = cfg.seed,
                .record_timing = cfg.timing,
                .x0 = std::nullopt};
    if (cfg.step) {
      md.step = *cfg.step;
    } else {
      const StepTuning tuning =
          tune_step_size(prepared.make, prepared.probe, cfg.step_grid, md, cfg.tune_seeds);
      md.step = tuning.step;
      out << fmt::format("tuned step {}{}\n", tuning.step,
                         tuning.at_endpoint ? " (warning: grid endpoint)" : "");
    }
    trace = run_md(problem, md, prepared.probe);
  }

  const fs::path dir = prepare_dir(common.out());
  write_file(dir / (run_id + ".csv"), [&](std::ostream& os) {
    write_run_csv(os, run_id, algo, prepared.label, cfg.seed, trace);
  });
  write_file(dir / (run_id + ".dat"), [&](std::ostream& os) { write_plot_data(os, trace); });
  const TraceRecord& last = trace.records.back();
  out << fmt::format("{}: grad_g_calls={} f_calls={} final_gap={}{}\n", run_id, last.grad_g_calls,
                     last.f_calls, last.psi0_gap.value_or(std::nan("")),
                     trace.inner_capped ? " (inner iterations capped)" : "");
  return 0;
}

void write_tuning_csv(std::ostream& os, const std::vector<TopologyReport>& reports) {
  os << "topology,algo,step,mean_final_gap,chosen\n";
  for (const TopologyReport& rep : reports) {
    for (const auto& [name, tuning] : {std::pair{"md1", &rep.md1_tuning}, {"md0", &rep.md0_tuning}}) {
      if (!*tuning) continue;
      const StepTuning& t = **tuning;
      for (std::size_t i = 0; i < t.grid.size(); ++i) {
        os << fmt::format("{},{},{},{},{}\n", rep.topology, name, t.grid[i], t.scores[i],
                          t.grid[i] == t.step ? 1 : 0);
      }
    }
  }
}

int cmd_bench(const Common& common, std::ostream& out, std::ostream& err) {
  Config cfg = load(common);
  if (cfg.kind != ProblemKind::geomedian) {
    throw CliError{"config", "problem.kind", "bench needs problem.kind = geomedian"};
  }
  if (common.seed) {
    for (auto& s : cfg.seeds) s += *common.seed;
  }
  const ExperimentResult result = run_experiment(cfg.experiment(), common.workers(), &err);

  const fs::path dir = prepare_dir(common.out());
  const fs::path runs = prepare_dir(dir / "runs");
  const fs::path plots = prepare_dir(dir / "plot");
  for (const CellResult& cell : result.cells) {
    if (!cell.ok()) continue;
    const std::string algo(algorithm_name(cell.algo));
    write_file(runs / (cell.run_id + ".csv"), [&](std::ostream& os) {
      write_run_csv(os, cell.run_id, algo, cell.topology, cell.seed, cell.trace);
    });
    write_file(plots / (cell.run_id + ".dat"),
               [&](std::ostream& os) { write_plot_data(os, cell.trace); });
  }
  write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, result.summary); });
  write_file(dir / "tuning.csv", [&](std::ostream& os) { write_tuning_csv(os, result.topologies); });

  for (const SummaryRow& row : result.summary) {
    out << fmt::format("{:<12} {:<7} comm_to_10pct={:<8} final_gap={}\n", row.topology,
                       algorithm_name(row.algo),
                       row.median_comm_to_10pct ? fmt::format("{}", *row.median_comm_to_10pct)
                                                : std::string("inf"),
                       row.median_final_gap);
  }
  if (result.all_ok()) return 0;

  std::size_t failed = 0;
  for (const TopologyReport& rep : result.topologies) {
    if (!rep.error.empty()) {
      ++failed;
      out << fmt::format("failed topology {}: {}\n", rep.topology, rep.error);
    }
  }
  for (const CellResult& cell : result.cells) {
    if (!cell.ok()) {
      ++failed;
      out << fmt::format("failed run {}: {}\n", cell.run_id, cell.error);
    }
  }
  throw CliError{"run", "", fmt::format("{} of the requested runs or setups failed", failed)};
}

int cmd_spectra(const Common& common, const std::vector<std::string>& names,
                std::optional<int> M_flag, std::ostream& out) {
  const Config cfg = load(common);
  const Index M = M_flag ? *M_flag : cfg.M;
  if (M < 2) throw CliError{"usage", "--M", "M must be at least 2"};
  std::vector<std::string> topologies = names;
  if (topologies.empty()) topologies = {"star", "cycle", "chain", "complete"};

  const fs::path dir = prepare_dir(common.out());
  for (const std::string& name : topologies) {
    Topology topology;
    try {
      topology = parse_topology(name);
    } catch (const std::invalid_argument& e) {
      throw CliError{"usage", "--topology", e.what()};
    }
    const GossipMatrix W = build_gossip(topology, M);
    const std::string tag = fmt::format("{}_{}", topology_name(topology), M);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(W.W, Eigen::EigenvaluesOnly);
    Vector eig = solver.eigenvalues();
    // Round-off around the consensus eigenvalue is printed as 0.
    for (Index i = 0; i < eig.size(); ++i) {
      if (std::abs(eig[i]) <= 1e-12 * W.lambda_max) eig[i] = 0.0;
    }
    write_file(dir / ("W_" + tag + ".txt"), [&](std::ostream& os) { write_matrix(os, W.W); });
    write_file(dir / ("spectrum_" + tag + ".txt"), [&](std::ostream& os) {
      for (Index i = 0; i < eig.size(); ++i) os << fmt::format("{:.12g}\n", eig[i]);
    });
    out << fmt::format("{}: lambda_max={:.12g} lambda_min_positive={:.12g}\n", tag, W.lambda_max,
                       W.lambda_min_positive());
  }
  return 0;
}

int cmd_validate(const Common& common, std::ostream& out) {
  const Config cfg = load(common);
  out << fmt::format("ok kind={}\n", cfg.kind == ProblemKind::desk ? "desk" : "geomedian");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zeroth-order sliding and mirror-descent runs on composite problems", "opzosa"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "Config file (flat key = value)");
  app.add_option("--out", common.out_dir,
                 std::string("Output directory (default $") + kOutDirEnv + " or ./out)");
  app.add_option("--jobs", common.jobs, "Worker threads for bench (default: logical cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", common.seed,
                 "Seed: sets solver.seed for run, offsets bench.seeds for bench");
  app.add_option("--set", common.overrides, "Override key=value, applied after the file")
      ->allow_extra_args(false);

  CLI::App* run = app.add_subcommand("run", "Single run of solver.algo on the configured problem");
  CLI::App* bench = app.add_subcommand("bench", "Geometric-median sweep over topologies, algorithms and seeds");
  CLI::App* spectra = app.add_subcommand("spectra", "Dump gossip matrices and their spectra");
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate the config");

  std::vector<std::string> spectra_topologies;
  std::optional<int> spectra_M;
  spectra->add_option("--topology", spectra_topologies, "Topology (repeatable; default: all four)");
  spectra->add_option("--M", spectra_M, "Number of nodes (default problem.M)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report(err, {"usage", "", e.what()});
    return 2;
  }

  try {
    if (*run) return cmd_run(common, out);
    if (*bench) return cmd_bench(common, out, err);
    if (*spectra) return cmd_spectra(common, spectra_topologies, spectra_M, out);
    if (*validate) return cmd_validate(common, out);
  } catch (const CliError& e) {
    report(err, e);
    return e.kind == "usage" ? 2 : 1;
  } catch (const ConfigError& e) {
    report(err, {"config", e.key(), e.key().empty() ? e.what() : std::string(e.what()).substr(e.key().size() + 2)});
    return 1;
  } catch (const std::exception& e) {
    report(err, {"run", "", e.what()});
    return 1;
  }
  return 2;
}

}  // namespace opzosa

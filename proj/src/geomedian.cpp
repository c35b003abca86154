#include "opzosa/geomedian.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace opzosa {

namespace {

template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t j = 0; j < workers; ++j) pool.emplace_back(worker);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

// prox of eta |x - b|_2 evaluated at v.
void shrink_towards(Eigen::Ref<Vector> v, const Vector& b, double eta) {
  const Vector d = v - b;
  const double norm = d.norm();
  if (norm <= eta) {
    v = b;
  } else {
    v = b + (1.0 - eta / norm) * d;
  }
}

}  // namespace

std::vector<Vector> generate_data(Index M, Index n, std::uint64_t data_seed) {
  if (M < 1 || n < 1) throw std::invalid_argument("generate_data: M and n must be positive");
  Rng rng(derive_seed(data_seed, 0));
  NormalDistribution normal(1.0, std::sqrt(2.0));
  std::vector<Vector> anchors(static_cast<std::size_t>(M), Vector(n));
  for (Vector& b : anchors) {
    for (Index i = 0; i < n; ++i) b[i] = normal(rng);
  }
  return anchors;
}

LocalTerm geomedian_local(const Vector& x, const Vector& b, const Vector& xi) {
  const Vector d = x - (b + xi);
  const double norm = d.norm();
  if (norm == 0.0) return {0.0, Vector::Zero(x.size())};
  return {norm, d / norm};
}

PenaltyModel::PenaltyModel(double lambda, std::optional<GossipMatrix> W, PenaltyScale scale)
    : lambda_(lambda), gossip_(std::move(W)), scale_(scale) {
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("penalty: lambda must be nonnegative");
}

PenaltyModel PenaltyModel::centralized(double lambda) {
  return PenaltyModel(lambda, std::nullopt, PenaltyScale::full);
}

PenaltyModel PenaltyModel::decentralized(double lambda, GossipMatrix W, PenaltyScale scale) {
  return PenaltyModel(lambda, std::move(W), scale);
}

PenaltyEval PenaltyModel::evaluate(const StackedPoint& X, CommCounter* comm) const {
  if (gossip_) return decentralized_penalty(X, lambda_, *gossip_, scale_, comm);
  return centralized_penalty(X, lambda_, comm);
}

double PenaltyModel::smoothness(Index M) const {
  if (gossip_) return decentralized_smoothness(lambda_, *gossip_, scale_);
  return centralized_smoothness(lambda_, M);
}

std::string PenaltyModel::label() const {
  return gossip_ ? std::string(topology_name(gossip_->topology)) : std::string("centralized");
}

PenaltyModel make_penalty(std::string_view topology, double lambda, Index M, PenaltyScale scale) {
  if (topology == "centralized") return PenaltyModel::centralized(lambda);
  return PenaltyModel::decentralized(lambda, build_gossip(parse_topology(topology), M), scale);
}

GeomedianProblem::GeomedianProblem(std::vector<Vector> anchors, PenaltyModel penalty,
                                   double sigma, double r)
    : anchors_(std::make_shared<const std::vector<Vector>>(std::move(anchors))),
      penalty_(std::make_shared<const PenaltyModel>(std::move(penalty))),
      M_(static_cast<Index>(anchors_->size())),
      n_(anchors_->empty() ? 0 : anchors_->front().size()),
      sigma_(sigma),
      r_(r) {
  if (M_ < 1 || n_ < 1) throw std::invalid_argument("geomedian: need at least one anchor");
  for (const Vector& b : *anchors_) {
    if (b.size() != n_) throw std::invalid_argument("geomedian: anchors differ in dimension");
  }
  if (penalty_->gossip() && penalty_->gossip()->size() != M_) {
    throw std::invalid_argument("geomedian: gossip matrix does not match the device count");
  }
  if (!(sigma_ >= 0.0)) throw std::invalid_argument("geomedian: sigma must be nonnegative");
  if (!(r_ > 0.0)) throw std::invalid_argument("geomedian: r must be positive");
  double max_norm = 0.0;
  for (const Vector& b : *anchors_) max_norm = std::max(max_norm, b.norm());
  radius_ = max_norm > 0.0 ? 2.0 * max_norm : 1.0;
}

double GeomedianProblem::effective_sigma() const {
  return sigma_ * std::sqrt(static_cast<double>(M_));
}

double GeomedianProblem::G() const { return std::sqrt(static_cast<double>(M_)); }

double GeomedianProblem::L() const { return penalty_->smoothness(M_); }

double GeomedianProblem::local_sum(const Vector& x) const {
  double s = 0.0;
  for (Index m = 0; m < M_; ++m) s += (x.segment(m * n_, n_) - (*anchors_)[m]).norm();
  return s;
}

double GeomedianProblem::objective(const Vector& x) const {
  return local_sum(x) + penalty_->evaluate(as_stacked(x, M_, n_)).value;
}

CompositeProblem GeomedianProblem::make_problem() const {
  const auto anchors = anchors_;
  const auto penalty = penalty_;
  const Index M = M_;
  const Index n = n_;
  const double sigma = sigma_;

  GradientOracle smooth(
      [penalty, M, n](const Vector& x) { return penalty->evaluate(as_stacked(x, M, n)).value; },
      [penalty, M, n](const Vector& x) -> Vector {
        const StackedPoint grad = penalty->evaluate(as_stacked(x, M, n)).grad;
        return Eigen::Map<const Vector>(grad.data(), grad.size());
      },
      L());

  const auto noiseless = [anchors, M, n](const Vector& x) {
    double s = 0.0;
    for (Index m = 0; m < M; ++m) s += (x.segment(m * n, n) - (*anchors)[m]).norm();
    return s;
  };
  ValueOracle::NoisyObjective noisy = [anchors, M, n, sigma, noiseless](const Vector& x, Rng& rng) {
    if (sigma == 0.0) return noiseless(x);
    // |d - xi| with xi ~ N(0, sigma^2 I_n) is distributed as
    // sigma * sqrt((|d|/sigma - z)^2 + chi2_{n-1}); two draws per device instead of n.
    NormalDistribution normal;
    double s = 0.0;
    for (Index m = 0; m < M; ++m) {
      const double radial = (x.segment(m * n, n) - (*anchors)[m]).norm() - sigma * normal(rng);
      const double rest = n > 1 ? sigma * sigma * chi_squared(rng, static_cast<double>(n - 1)) : 0.0;
      s += std::sqrt(radial * radial + rest);
    }
    return s;
  };
  SubgradientOracle subgradient = [anchors, M, n, sigma](const Vector& x, Rng& rng) -> Vector {
    NormalDistribution normal(0.0, sigma > 0.0 ? sigma : 1.0);
    Vector out(M * n);
    Vector xi = Vector::Zero(n);
    for (Index m = 0; m < M; ++m) {
      if (sigma > 0.0) {
        for (Index i = 0; i < n; ++i) xi[i] = normal(rng);
      }
      out.segment(m * n, n) = geomedian_local(x.segment(m * n, n), (*anchors)[m], xi).subgradient;
    }
    return out;
  };

  CompositeProblem problem{std::move(smooth),
                           ValueOracle(std::move(noisy), noiseless, effective_sigma()),
                           ProxSetup::euclidean(stacked_dim()),
                           FeasibleSet::block_balls(M, n, radius_),
                           G(),
                           effective_sigma(),
                           r_,
                           std::move(subgradient)};
  problem.validate();
  return problem;
}

ReferenceSolution reference_solution(const GeomedianProblem& problem, double tolerance,
                                     int max_iterations) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("reference_solution: tolerance must be positive");
  const Index M = problem.devices();
  const Index n = problem.local_dim();
  const double L = problem.L();
  const double eta = L > 0.0 ? 1.0 / L : 1.0;
  const auto& anchors = problem.anchors();

  const auto prox_step = [&](const Vector& y, Vector& out) {
    out = y;
    if (L > 0.0) {
      const StackedPoint grad = problem.penalty().evaluate(as_stacked(y, M, n)).grad;
      out -= eta * Eigen::Map<const Vector>(grad.data(), grad.size());
    }
    for (Index m = 0; m < M; ++m) shrink_towards(out.segment(m * n, n), anchors[m], eta);
  };

  Vector x = Vector::Zero(M * n);
  Vector y = x;
  Vector next(M * n);
  double t = 1.0;
  double psi = problem.objective(x);
  ReferenceSolution best{x, psi, 0};
  for (int it = 1; it <= max_iterations; ++it) {
    prox_step(y, next);
    const double mapping = (y - next).norm() / eta;
    const double psi_next = problem.objective(next);
    if (psi_next < best.psi_star) {
      best.x_star = next;
      best.psi_star = psi_next;
    }
    best.iterations = it;
    if (mapping <= tolerance) return best;
    if (psi_next > psi) {
      // Adaptive restart: drop the momentum.
      t = 1.0;
      y = next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - x);
      t = t_next;
    }
    x = next;
    psi = psi_next;
  }
  throw std::runtime_error(fmt::format("reference_solution: no convergence to {} within {} iterations",
                                      tolerance, max_iterations));
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "opzosa") return Algorithm::opzosa;
  if (name == "md1") return Algorithm::md1;
  if (name == "md0") return Algorithm::md0;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected opzosa, md1 or md0)");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::opzosa: return "opzosa";
    case Algorithm::md1: return "md1";
    case Algorithm::md0: return "md0";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (n < 1 || M < 2) throw std::invalid_argument("experiment: need n >= 1 and M >= 2");
  if (!(lambda > 0.0)) throw std::invalid_argument("experiment: lambda must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("experiment: sigma must be nonnegative");
  if (!(r > 0.0) || !(md_r > 0.0)) throw std::invalid_argument("experiment: r must be positive");
  if (N_outer < 1) throw std::invalid_argument("experiment: N_outer must be positive");
  if (md_steps < 0) throw std::invalid_argument("experiment: md_steps must be nonnegative");
  if (topologies.empty() || algorithms.empty() || seeds.empty()) {
    throw std::invalid_argument("experiment: empty topology, algorithm or seed list");
  }
  for (const auto& t : topologies) {
    if (t != "centralized") parse_topology(t);
  }
  if (step_grid.empty() || tune_seeds.empty()) {
    throw std::invalid_argument("experiment: empty step grid or tuning seed list");
  }
  for (double s : step_grid) {
    if (!(s > 0.0)) throw std::invalid_argument("experiment: step sizes must be positive");
  }
  if (!(reference_tolerance > 0.0)) {
    throw std::invalid_argument("experiment: reference tolerance must be positive");
  }
}

bool ExperimentResult::all_ok() const {
  for (const auto& t : topologies) {
    if (!t.error.empty()) return false;
  }
  for (const auto& c : cells) {
    if (!c.ok()) return false;
  }
  return true;
}

std::optional<std::int64_t> comm_to_fraction(const RunTrace& trace, double fraction) {
  if (trace.records.empty() || !trace.records.front().psi0_gap) return std::nullopt;
  const double target = fraction * *trace.records.front().psi0_gap;
  for (const TraceRecord& rec : trace.records) {
    if (rec.psi0_gap && *rec.psi0_gap <= target) return rec.grad_g_calls;
  }
  return std::nullopt;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs, std::ostream* log) {
  cfg.validate();
  std::mutex log_mutex;
  const auto say = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    *log << line << '\n';
  };

  const std::vector<Vector> anchors = generate_data(cfg.M, cfg.n, cfg.data_seed);

  struct TopologySetup {
    std::optional<GeomedianProblem> problem;
    double psi_star = 0.0;
  };
  const std::size_t T = cfg.topologies.size();
  std::vector<TopologySetup> setups(T);
  ExperimentResult result;
  result.topologies.resize(T);

  parallel_for(T, jobs, [&](std::size_t i) {
    const std::string& name = cfg.topologies[i];
    TopologyReport& report = result.topologies[i];
    report.topology = name;
    try {
      PenaltyModel penalty = make_penalty(name, cfg.lambda, cfg.M, cfg.scale);
      setups[i].problem.emplace(anchors, std::move(penalty), cfg.sigma, cfg.r);
      const ReferenceSolution ref = reference_solution(*setups[i].problem, cfg.reference_tolerance);
      setups[i].psi_star = ref.psi_star;
      report.psi_star = ref.psi_star;
      say(fmt::format("[{}] reference psi* = {} ({} iterations)", name, ref.psi_star, ref.iterations));
    } catch (const std::exception& e) {
      setups[i].problem.reset();
      report.error = e.what();
      say(fmt::format("[{}] setup failed: {}", name, e.what()));
    }
  });

  const auto probe_for = [&](std::size_t i) -> GapProbe {
    const GeomedianProblem* p = &*setups[i].problem;
    const double psi_star = setups[i].psi_star;
    return [p, psi_star](const Vector& x) { return p->objective(x) - psi_star; };
  };

  // Step tuning for the baselines, one task per (topology, variant).
  struct TuneTask {
    std::size_t topology;
    Algorithm algo;
  };
  std::vector<TuneTask> tune_tasks;
  for (std::size_t i = 0; i < T; ++i) {
    if (!setups[i].problem) continue;
    for (Algorithm a : cfg.algorithms) {
      if (a != Algorithm::opzosa) tune_tasks.push_back({i, a});
    }
  }
  std::vector<std::optional<StepTuning>> tunings(tune_tasks.size());
  parallel_for(tune_tasks.size(), jobs, [&](std::size_t j) {
    const TuneTask& task = tune_tasks[j];
    const GeomedianProblem& gp = *setups[task.topology].problem;
    MdConfig base{.step = 1.0,
                  .steps = cfg.md_budget(),
                  .variant = task.algo == Algorithm::md1 ? MdVariant::first_order
                                                         : MdVariant::zeroth_order,
                  .r = cfg.md_r,
                  .x0 = std::nullopt};
    try {
      tunings[j] = tune_step_size([&gp] { return gp.make_problem(); }, probe_for(task.topology),
                                  cfg.step_grid, base, cfg.tune_seeds);
      const std::string& name = cfg.topologies[task.topology];
      say(fmt::format("[{}] {} tuned step = {}{}", name, algorithm_name(task.algo), tunings[j]->step,
                      tunings[j]->at_endpoint ? " (warning: grid endpoint)" : ""));
    } catch (const std::exception& e) {
      say(fmt::format("[{}] {} tuning failed: {}", cfg.topologies[task.topology],
                      algorithm_name(task.algo), e.what()));
    }
  });
  for (std::size_t j = 0; j < tune_tasks.size(); ++j) {
    TopologyReport& report = result.topologies[tune_tasks[j].topology];
    (tune_tasks[j].algo == Algorithm::md1 ? report.md1_tuning : report.md0_tuning) = tunings[j];
  }

  struct CellTask {
    std::size_t topology;
    Algorithm algo;
    std::uint64_t seed;
  };
  std::vector<CellTask> cell_tasks;
  for (std::size_t i = 0; i < T; ++i) {
    for (Algorithm a : cfg.algorithms) {
      for (std::uint64_t s : cfg.seeds) cell_tasks.push_back({i, a, s});
    }
  }
  result.cells.resize(cell_tasks.size());
  parallel_for(cell_tasks.size(), jobs, [&](std::size_t c) {
    const CellTask& task = cell_tasks[c];
    CellResult& cell = result.cells[c];
    cell.algo = task.algo;
    cell.topology = cfg.topologies[task.topology];
    cell.seed = task.seed;
    cell.run_id = fmt::format("{}_{}_s{}", cell.topology, algorithm_name(task.algo), task.seed);
    try {
      if (!setups[task.topology].problem) {
        throw std::runtime_error("topology setup failed: " + result.topologies[task.topology].error);
      }
      const GeomedianProblem& gp = *setups[task.topology].problem;
      CompositeProblem problem = gp.make_problem();
      const GapProbe probe = probe_for(task.topology);
      if (task.algo == Algorithm::opzosa) {
        SlidingOptions options;
        options.anchor = cfg.anchor;
        options.inner_cap = cfg.inner_cap;
        options.seed = task.seed;
        options.record_timing = cfg.record_timing;
        cell.trace = run_opzosa(problem, cfg.N_outer, options, probe);
      } else {
        const TopologyReport& report = result.topologies[task.topology];
        const auto& tuning = task.algo == Algorithm::md1 ? report.md1_tuning : report.md0_tuning;
        if (!tuning) throw std::runtime_error("step tuning failed");
        cell.step = tuning->step;
        MdConfig md{.step = tuning->step,
                    .steps = cfg.md_budget(),
                    .variant = task.algo == Algorithm::md1 ? MdVariant::first_order
                                                           : MdVariant::zeroth_order,
                    .r = cfg.md_r,
                    .seed = task.seed,
                    .record_timing = cfg.record_timing,
                    .x0 = std::nullopt};
        cell.trace = run_md(problem, md, probe);
      }
      say(fmt::format("[{}] done: final gap {}", cell.run_id,
                      cell.trace.records.back().psi0_gap.value_or(std::nan(""))));
    } catch (const std::exception& e) {
      cell.error = e.what();
      say(fmt::format("[{}] failed: {}", cell.run_id, e.what()));
    }
  });

  for (std::size_t i = 0; i < T; ++i) {
    for (Algorithm a : cfg.algorithms) {
      std::vector<double> comm;
      std::vector<double> final_gap;
      for (const CellResult& cell : result.cells) {
        if (cell.topology != cfg.topologies[i] || cell.algo != a || !cell.ok()) continue;
        const auto reached = comm_to_fraction(cell.trace);
        comm.push_back(reached ? static_cast<double>(*reached)
                               : std::numeric_limits<double>::infinity());
        final_gap.push_back(cell.trace.records.back().psi0_gap.value_or(std::nan("")));
      }
      if (comm.empty()) continue;
      const double med = median(comm);
      result.summary.push_back(SummaryRow{cfg.topologies[i], a,
                                          std::isfinite(med) ? std::optional<double>(med) : std::nullopt,
                                          median(final_gap)});
    }
  }
  return result;
}

void write_run_csv(std::ostream& os, const std::string& run_id, std::string_view algo,
                   std::string_view topology, std::uint64_t seed, const RunTrace& trace) {
  os << kRunCsvHeader << '\n';
  for (const TraceRecord& rec : trace.records) {
    os << fmt::format("{},{},{},{},{},{},{},{},{}\n", run_id, algo, topology, seed, rec.k,
                      rec.grad_g_calls, rec.f_calls,
                      rec.psi0_gap ? fmt::format("{}", *rec.psi0_gap) : std::string(),
                      rec.wall_ms);
  }
}

void write_plot_data(std::ostream& os, const RunTrace& trace) {
  os << "# grad_g_calls psi0_gap\n";
  for (const TraceRecord& rec : trace.records) {
    if (rec.psi0_gap) os << fmt::format("{} {}\n", rec.grad_g_calls, *rec.psi0_gap);
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryCsvHeader << '\n';
  for (const SummaryRow& row : rows) {
    os << fmt::format("{},{},{},{}\n", row.topology, algorithm_name(row.algo),
                      row.median_comm_to_10pct ? fmt::format("{}", *row.median_comm_to_10pct)
                                               : std::string("inf"),
                      row.median_final_gap);
  }
}

}  // namespace opzosa

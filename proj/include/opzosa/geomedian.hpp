#pragma once

#include "opzosa/mirror_descent.hpp"
#include "opzosa/network.hpp"
#include "opzosa/sliding.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace opzosa {

/// M anchor vectors with i.i.d. N(1, 2) coordinates.
std::vector<Vector> generate_data(Index M, Index n, std::uint64_t data_seed);

struct LocalTerm {
  double value;
  Vector subgradient;
};

/// |x - (b + xi)|_2 and its subgradient (zero at the kink).
LocalTerm geomedian_local(const Vector& x, const Vector& b, const Vector& xi);

/// Consensus penalty over the stacked variable: centralized, or
/// decentralized with a gossip matrix.
class PenaltyModel {
 public:
  static PenaltyModel centralized(double lambda);
  static PenaltyModel decentralized(double lambda, GossipMatrix W, PenaltyScale scale);

  PenaltyEval evaluate(const StackedPoint& X, CommCounter* comm = nullptr) const;
  double smoothness(Index M) const;
  double lambda() const { return lambda_; }
  bool is_centralized() const { return !gossip_.has_value(); }
  const std::optional<GossipMatrix>& gossip() const { return gossip_; }
  /// Topology name, or "centralized".
  std::string label() const;

 private:
  PenaltyModel(double lambda, std::optional<GossipMatrix> W, PenaltyScale scale);
  double lambda_;
  std::optional<GossipMatrix> gossip_;
  PenaltyScale scale_;
};

/// "centralized" or a topology name; the scale only matters for the latter.
PenaltyModel make_penalty(std::string_view topology, double lambda, Index M, PenaltyScale scale);

/// Distributed geometric median: sum_m |x_m - b_m| + consensus penalty,
/// over a product of Euclidean balls of radius 2 max_m |b_m|.
///
/// Every value or subgradient query perturbs each anchor with fresh
/// N(0, sigma^2 I) noise, so the scalar noise of a query is roughly
/// sigma sqrt(M); that effective level feeds the schedules.
class GeomedianProblem {
 public:
  GeomedianProblem(std::vector<Vector> anchors, PenaltyModel penalty, double sigma, double r);

  Index devices() const { return M_; }
  Index local_dim() const { return n_; }
  Index stacked_dim() const { return M_ * n_; }
  double radius() const { return radius_; }
  double sigma() const { return sigma_; }
  double effective_sigma() const;
  /// Gradient bound of the stacked f: sqrt(M).
  double G() const;
  double L() const;
  const std::vector<Vector>& anchors() const { return *anchors_; }
  const PenaltyModel& penalty() const { return *penalty_; }

  /// Fresh problem; the gradient oracle counts communication rounds.
  CompositeProblem make_problem() const;
  /// Noiseless Psi_0 on a flat stacked vector.
  double objective(const Vector& x) const;
  double local_sum(const Vector& x) const;

 private:
  std::shared_ptr<const std::vector<Vector>> anchors_;
  std::shared_ptr<const PenaltyModel> penalty_;
  Index M_;
  Index n_;
  double sigma_;
  double r_;
  double radius_;
};

struct ReferenceSolution {
  Vector x_star;
  double psi_star;
  int iterations;
};

/// Accelerated proximal gradient with adaptive restart on the noiseless
/// problem, stopped when the gradient-mapping norm drops below `tolerance`.
/// Throws std::runtime_error if the iteration cap is reached first.
ReferenceSolution reference_solution(const GeomedianProblem& problem, double tolerance,
                                     int max_iterations = 2'000'000);

enum class Algorithm { opzosa, md1, md0 };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm a);

struct ExperimentConfig {
  Index n = 20;
  Index M = 10;
  double lambda = 100.0;
  double sigma = 0.01;
  double r = 1e-2;
  PenaltyScale scale = PenaltyScale::half;
  /// Topology names; "centralized" selects the server-averaging penalty.
  std::vector<std::string> topologies = {"star", "cycle", "chain", "complete"};
  std::vector<Algorithm> algorithms = {Algorithm::opzosa, Algorithm::md1, Algorithm::md0};
  int N_outer = 100;
  int md_steps = 0;  // 0 means N_outer
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::uint64_t data_seed = 1;
  std::vector<double> step_grid = default_step_grid();
  std::vector<std::uint64_t> tune_seeds = {1000};
  double md_r = 1e-2;
  GradientAnchor anchor = GradientAnchor::lower_point;
  std::int64_t inner_cap = kDefaultInnerCap;
  double reference_tolerance = 1e-6;
  bool record_timing = false;

  int md_budget() const { return md_steps > 0 ? md_steps : N_outer; }
  void validate() const;
};

struct CellResult {
  std::string run_id;
  Algorithm algo;
  std::string topology;
  std::uint64_t seed;
  std::optional<double> step;  // tuned MD step
  RunTrace trace;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct SummaryRow {
  std::string topology;
  Algorithm algo;
  std::optional<double> median_comm_to_10pct;  // empty when the median run never got there
  double median_final_gap;
};

struct TopologyReport {
  std::string topology;
  double psi_star;
  std::optional<StepTuning> md1_tuning;
  std::optional<StepTuning> md0_tuning;
  std::string error;
};

struct ExperimentResult {
  std::vector<TopologyReport> topologies;
  std::vector<CellResult> cells;  // sorted by (topology, algo, seed)
  std::vector<SummaryRow> summary;

  bool all_ok() const;
};

/// Communications needed to bring the gap to 10% of its initial value.
std::optional<std::int64_t> comm_to_fraction(const RunTrace& trace, double fraction = 0.1);

/// Runs every (topology x algorithm x seed) cell on up to `jobs` threads.
/// Failures are recorded per cell; the sweep always completes.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                std::ostream* log = nullptr);

inline constexpr const char* kRunCsvHeader =
    "run_id,algo,topology,seed,k,grad_g_calls,f_calls,psi0_gap,wall_ms";
inline constexpr const char* kSummaryCsvHeader =
    "topology,algo,median_comm_to_10pct,median_final_gap";

void write_run_csv(std::ostream& os, const std::string& run_id, std::string_view algo,
                   std::string_view topology, std::uint64_t seed, const RunTrace& trace);
void write_plot_data(std::ostream& os, const RunTrace& trace);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace opzosa

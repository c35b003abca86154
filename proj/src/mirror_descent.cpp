#include "opzosa/mirror_descent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opzosa {

RunTrace run_md(CompositeProblem& problem, const MdConfig& cfg, const GapProbe& probe) {
  problem.validate();
  if (!(cfg.step > 0.0)) throw std::invalid_argument("run_md: step size must be positive");
  if (cfg.steps < 1) throw std::invalid_argument("run_md: number of steps must be positive");
  if (cfg.variant == MdVariant::first_order && !problem.subgradient) {
    throw std::invalid_argument("run_md: first-order variant needs an exact subgradient of f");
  }

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::int64_t grad_base = problem.smooth.calls();
  const std::int64_t f_base = problem.nonsmooth.calls();
  const auto record = [&](int k, const Vector& x) {
    std::optional<double> gap;
    if (probe) gap = probe(x);
    const double ms = cfg.record_timing
                          ? std::chrono::duration<double, std::milli>(Clock::now() - start).count()
                          : 0.0;
    return TraceRecord{k, problem.smooth.calls() - grad_base, problem.nonsmooth.calls() - f_base,
                       gap, ms};
  };

  Vector x = cfg.x0 ? *cfg.x0 : problem.set.center();
  if (!problem.set.contains(x)) throw std::invalid_argument("run_md: x0 is infeasible");
  Vector direction(x.size());
  Vector next(x.size());

  std::optional<GradientEstimator> estimator;
  if (cfg.variant == MdVariant::zeroth_order) {
    estimator.emplace(EstimatorConfig{cfg.r, problem.dimension()});
  }
  EstimatorStreams streams = EstimatorStreams::from_seed(cfg.seed);
  Rng subgradient_noise(derive_seed(cfg.seed, 3));

  RunTrace trace;
  trace.records.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  trace.records.push_back(record(0, x));
  const double beta = 1.0 / cfg.step;
  for (int k = 1; k <= cfg.steps; ++k) {
    direction = problem.smooth.gradient(x);
    if (cfg.variant == MdVariant::first_order) {
      direction += problem.subgradient(x, subgradient_noise);
    } else {
      direction += estimator->one_point(problem.nonsmooth, x, streams);
    }
    composite_prox(problem.setup, problem.set, direction, beta, 0.0, x, x, next);
    x.swap(next);
    trace.records.push_back(record(k, x));
  }
  trace.final_point = std::move(x);
  return trace;
}

StepTuning tune_step_size(const std::function<CompositeProblem()>& make_problem,
                          const GapProbe& probe, const std::vector<double>& grid,
                          const MdConfig& base, const std::vector<std::uint64_t>& seeds) {
  if (grid.empty()) throw std::invalid_argument("tune_step_size: empty grid");
  if (seeds.empty()) throw std::invalid_argument("tune_step_size: empty seed set");
  if (!probe) throw std::invalid_argument("tune_step_size: a gap probe is required");

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  StepTuning out{sorted.front(), false, sorted, {}};
  double best = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (double step : sorted) {
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      CompositeProblem problem = make_problem();
      MdConfig cfg = base;
      cfg.step = step;
      cfg.seed = seed;
      const RunTrace trace = run_md(problem, cfg);
      const double gap = probe(trace.final_point);
      total += std::isfinite(gap) ? gap : std::numeric_limits<double>::infinity();
    }
    const double score = total / static_cast<double>(seeds.size());
    out.scores.push_back(score);
    // Strict comparison keeps the smaller step on ties.
    if (std::isfinite(score) && (!any_finite || score < best)) {
      best = score;
      out.step = step;
      any_finite = true;
    }
  }
  out.at_endpoint = sorted.size() > 1 && (out.step == sorted.front() || out.step == sorted.back());
  return out;
}

std::vector<double> default_step_grid() {
  return {1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2,
          1e-1, 2e-1, 5e-1, 1e0,  2e0,  5e0,  1e1};
}

}  // namespace opzosa

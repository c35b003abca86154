#include "opzosa/sliding.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opzosa {

void CompositeProblem::validate() const {
  set.check_compatible(setup);
  if (!(G > 0.0)) throw std::invalid_argument("problem: G must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("problem: r must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("problem: sigma must be nonnegative");
  if (!(L() > 0.0)) throw std::invalid_argument("problem: L must be positive");
  if (!(diameter() > 0.0)) throw std::invalid_argument("problem: set diameter must be positive");
}

double gtilde_squared(Index n, double p_sq, double G) {
  return 16.0 * p_sq * static_cast<double>(n) * G * G;
}

double rho_squared(Index n, double p_sq, double G, double sigma, double r) {
  const double dn = static_cast<double>(n);
  return 14.0 * dn * p_sq * G * G + 4.0 * dn * dn * p_sq * sigma * sigma / (r * r);
}

SlidingSchedule::SlidingSchedule(int N, double L, double D, double gtilde_sq, double rho_sq,
                                 std::int64_t cap)
    : N_(N), L_(L), D_(D), gtilde_sq_(gtilde_sq), rho_sq_(rho_sq), cap_(cap) {
  if (N < 1) throw std::invalid_argument("schedule: N must be positive");
  if (!(L > 0.0) || !(D > 0.0)) throw std::invalid_argument("schedule: L and D must be positive");
  if (!(gtilde_sq >= 0.0) || !(rho_sq >= 0.0)) {
    throw std::invalid_argument("schedule: variance constants must be nonnegative");
  }
  if (cap < 1) throw std::invalid_argument("schedule: inner cap must be positive");
}

SlidingSchedule SlidingSchedule::from_constants(int N, double L, double D, double gtilde_sq,
                                                double rho_sq, std::int64_t inner_cap) {
  return SlidingSchedule(N, L, D, gtilde_sq, rho_sq, inner_cap);
}

SlidingSchedule SlidingSchedule::build(const CompositeProblem& problem, int N,
                                       std::int64_t inner_cap) {
  problem.validate();
  const Index n = problem.dimension();
  const double p_sq = p_squared(n, problem.setup);
  return SlidingSchedule(N, problem.L(), problem.diameter(),
                         gtilde_squared(n, p_sq, problem.G),
                         rho_squared(n, p_sq, problem.G, problem.sigma, problem.r), inner_cap);
}

double SlidingSchedule::beta(int k) const { return 2.0 * L_ / k; }
double SlidingSchedule::gamma(int k) const { return 2.0 / (k + 1.0); }
double SlidingSchedule::Gamma(int k) const { return 2.0 / (k * (k + 1.0)); }

double SlidingSchedule::inner_iterations_exact(int k) const {
  const double dk = k;
  const double t = 4.0 * N_ * (gtilde_sq_ + rho_sq_) * dk * dk / (3.0 * D_ * D_ * L_ * L_);
  return std::max(1.0, t);
}

bool SlidingSchedule::capped(int k) const {
  return std::ceil(inner_iterations_exact(k)) > static_cast<double>(cap_);
}

std::int64_t SlidingSchedule::inner_iterations(int k) const {
  const double t = std::ceil(inner_iterations_exact(k));
  if (t > static_cast<double>(cap_)) return cap_;
  return static_cast<std::int64_t>(t);
}

std::int64_t SlidingSchedule::total_inner_iterations() const {
  std::int64_t total = 0;
  for (int k = 1; k <= N_; ++k) total += inner_iterations(k);
  return total;
}

double SlidingSchedule::p(std::int64_t t) { return 0.5 * static_cast<double>(t); }

double SlidingSchedule::theta(std::int64_t t) {
  const double dt = static_cast<double>(t);
  return 2.0 * (dt + 1.0) / (dt * (dt + 3.0));
}

double SlidingSchedule::P(std::int64_t t) {
  const double dt = static_cast<double>(t);
  return 2.0 / ((dt + 1.0) * (dt + 2.0));
}

ProxSlideResult prox_slide(CompositeProblem& problem, const Vector& g_gradient, const Vector& x,
                           double beta, std::int64_t T, GradientEstimator& estimator,
                           EstimatorStreams& streams) {
  if (T < 1) throw std::invalid_argument("prox_slide: T must be positive");
  ProxSlideResult out{x, x};
  Vector& u = out.x_plus;
  Vector& u_avg = out.x_tilde_plus;
  Vector linear(x.size());
  Vector next(x.size());
  for (std::int64_t t = 1; t <= T; ++t) {
    linear = g_gradient + estimator.one_point(problem.nonsmooth, u, streams);
    composite_prox(problem.setup, problem.set, linear, beta, SlidingSchedule::p(t), x, u, next);
    const double theta = SlidingSchedule::theta(t);
    u_avg = (1.0 - theta) * u_avg + theta * next;
    u.swap(next);
  }
  return out;
}

RunTrace run_opzosa(CompositeProblem& problem, int N, const SlidingOptions& options,
                    const GapProbe& probe) {
  const SlidingSchedule schedule = SlidingSchedule::build(problem, N, options.inner_cap);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed_ms = [&] {
    if (!options.record_timing) return 0.0;
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  const std::int64_t grad_base = problem.smooth.calls();
  const std::int64_t f_base = problem.nonsmooth.calls();
  const auto record = [&](int k, const Vector& xbar) {
    std::optional<double> gap;
    if (probe) gap = probe(xbar);
    return TraceRecord{k, problem.smooth.calls() - grad_base, problem.nonsmooth.calls() - f_base,
                       gap, elapsed_ms()};
  };

  Vector x = options.x0 ? *options.x0 : problem.set.center();
  if (!problem.set.contains(x)) throw std::invalid_argument("run_opzosa: x0 is infeasible");
  Vector x_bar = x;
  Vector x_low(x.size());

  GradientEstimator estimator({problem.r, problem.dimension()});
  EstimatorStreams streams = EstimatorStreams::from_seed(options.seed);

  RunTrace trace;
  trace.records.reserve(static_cast<std::size_t>(N) + 1);
  trace.records.push_back(record(0, x_bar));
  for (int k = 1; k <= N; ++k) {
    const double gamma = schedule.gamma(k);
    x_low = (1.0 - gamma) * x_bar + gamma * x;
    const Vector& anchor = options.anchor == GradientAnchor::lower_point ? x_low : x;
    const Vector grad = problem.smooth.gradient(anchor);
    trace.inner_capped = trace.inner_capped || schedule.capped(k);
    ProxSlideResult step = prox_slide(problem, grad, x, schedule.beta(k),
                                      schedule.inner_iterations(k), estimator, streams);
    x = std::move(step.x_plus);
    x_bar = (1.0 - gamma) * x_bar + gamma * step.x_tilde_plus;
    trace.records.push_back(record(k, x_bar));
  }
  trace.final_point = std::move(x_bar);
  return trace;
}

}  // namespace opzosa

#pragma once

#include "opzosa/prox_geometry.hpp"
#include "opzosa/sampling.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace opzosa {

/// Stochastic subgradient of f; used only by the first-order baseline.
using SubgradientOracle = std::function<Vector(const Vector&, Rng&)>;

/// min_{x in X} f(x) + g(x) with a zeroth-order oracle for f and a gradient
/// oracle for g. The oracles carry mutable counters, so a problem instance
/// belongs to one run.
struct CompositeProblem {
  GradientOracle smooth;
  ValueOracle nonsmooth;
  ProxSetup setup;
  FeasibleSet set;
  double G;      // bound on |grad f|_2, used by the schedules only
  double sigma;  // noise level of the value oracle
  double r;      // smoothing radius
  SubgradientOracle subgradient = {};  // empty unless an exact subgradient exists

  double L() const { return smooth.smoothness(); }
  double diameter() const { return set.bregman_diameter(setup); }
  Index dimension() const { return setup.dimension(); }
  void validate() const;
};

/// Default ceiling on the number of inner iterations per outer step.
inline constexpr std::int64_t kDefaultInnerCap = 1'000'000;

/// Step sizes, averaging weights and inner-loop lengths for a horizon N.
class SlidingSchedule {
 public:
  static SlidingSchedule build(const CompositeProblem& problem, int N,
                               std::int64_t inner_cap = kDefaultInnerCap);
  static SlidingSchedule from_constants(int N, double L, double D, double gtilde_sq,
                                        double rho_sq, std::int64_t inner_cap = kDefaultInnerCap);

  int horizon() const { return N_; }
  double L() const { return L_; }
  double D() const { return D_; }
  double gtilde_sq() const { return gtilde_sq_; }
  double rho_sq() const { return rho_sq_; }

  double beta(int k) const;
  double gamma(int k) const;
  /// Gamma_k = 2 / (k (k + 1)).
  double Gamma(int k) const;
  /// Inner iterations T_k (ceiling of the uncapped formula, then capped).
  std::int64_t inner_iterations(int k) const;
  /// Uncapped real-valued max{1, 4N(Gt^2 + rho^2)k^2 / (3 D^2 L^2)}.
  double inner_iterations_exact(int k) const;
  bool capped(int k) const;
  std::int64_t total_inner_iterations() const;

  static double p(std::int64_t t);
  static double theta(std::int64_t t);
  /// Closed form P_t = 2 / ((t + 1)(t + 2)).
  static double P(std::int64_t t);

 private:
  SlidingSchedule(int N, double L, double D, double gtilde_sq, double rho_sq, std::int64_t cap);
  int N_;
  double L_;
  double D_;
  double gtilde_sq_;
  double rho_sq_;
  std::int64_t cap_;
};

/// Gt^2 = (4 p(n) sqrt(n) G)^2.
double gtilde_squared(Index n, double p_sq, double G);
/// rho^2 = 14 n p^2 G^2 + 4 n^2 p^2 sigma^2 / r^2.
double rho_squared(Index n, double p_sq, double G, double sigma, double r);

/// Where the linearization of g is taken in each outer step.
enum class GradientAnchor {
  lower_point,        // the extrapolated point x_k lower bar (default)
  previous_iterate,   // x_{k-1}, the literal reading of the algorithm listing
};

struct SlidingOptions {
  GradientAnchor anchor = GradientAnchor::lower_point;
  std::int64_t inner_cap = kDefaultInnerCap;
  std::uint64_t seed = 0;
  bool record_timing = false;
  std::optional<Vector> x0;  // defaults to the centre of the feasible set
};

using GapProbe = std::function<double(const Vector&)>;

struct TraceRecord {
  int k;
  std::int64_t grad_g_calls;
  std::int64_t f_calls;
  std::optional<double> psi0_gap;
  double wall_ms;
};

/// Per-outer-iteration history of one run. Record 0 is the starting point.
struct RunTrace {
  std::vector<TraceRecord> records;
  Vector final_point;
  bool inner_capped = false;
};

struct ProxSlideResult {
  Vector x_plus;
  Vector x_tilde_plus;
};

/// Inner prox-sliding loop: T prox steps on the linearized g plus one-point
/// estimates of grad f, started at x, with output averaging.
ProxSlideResult prox_slide(CompositeProblem& problem, const Vector& g_gradient, const Vector& x,
                           double beta, std::int64_t T, GradientEstimator& estimator,
                           EstimatorStreams& streams);

/// One-point zeroth-order sliding. The probe (if any) is evaluated at the
/// averaged iterate after every outer step and never touches the oracles.
RunTrace run_opzosa(CompositeProblem& problem, int N, const SlidingOptions& options = {},
                    const GapProbe& probe = {});

}  // namespace opzosa

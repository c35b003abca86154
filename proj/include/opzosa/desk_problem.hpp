#pragma once

#include "opzosa/sliding.hpp"

namespace opzosa {

/// Small test problem on a Euclidean ball centred at the origin:
///   g(x) = (L / 2) |x - a|^2,  f(x) = |x - c|_2  (so G = 1).
struct DeskProblemConfig {
  Index n = 2;
  double L = 1.0;
  double radius = 1.0;
  double sigma = 0.0;
  double r = 1e-3;
  Vector g_center;  // a; empty means 0.5 R e_0
  Vector f_center;  // c; empty means -0.5 R e_0 + 0.5 R e_1

  void validate() const;
};

struct DeskReference {
  Vector x_star;
  double psi_star;
};

class DeskProblem {
 public:
  explicit DeskProblem(DeskProblemConfig cfg);

  const DeskProblemConfig& config() const { return cfg_; }
  const Vector& g_center() const { return a_; }
  const Vector& f_center() const { return c_; }

  /// Fresh problem instance with zeroed counters and Gaussian value noise.
  CompositeProblem make_problem() const;
  /// Noiseless f + g.
  double objective(const Vector& x) const;
  /// Exact minimizer over the ball: closed form for a fixed multiplier of the
  /// ball constraint, bisection on the multiplier.
  DeskReference reference() const;

 private:
  DeskProblemConfig cfg_;
  Vector a_;
  Vector c_;
};

}  // namespace opzosa

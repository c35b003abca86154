#include "opzosa/desk_problem.hpp"

#include <cmath>
#include <stdexcept>

namespace opzosa {

void DeskProblemConfig::validate() const {
  if (n < 1) throw std::invalid_argument("desk problem: n must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("desk problem: L must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("desk problem: radius must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("desk problem: sigma must be nonnegative");
  if (!(r > 0.0)) throw std::invalid_argument("desk problem: r must be positive");
  if (g_center.size() != 0 && g_center.size() != n) {
    throw std::invalid_argument("desk problem: g_center has the wrong dimension");
  }
  if (f_center.size() != 0 && f_center.size() != n) {
    throw std::invalid_argument("desk problem: f_center has the wrong dimension");
  }
}

DeskProblem::DeskProblem(DeskProblemConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const Index n = cfg_.n;
  const double R = cfg_.radius;
  if (cfg_.g_center.size() == n) {
    a_ = cfg_.g_center;
  } else {
    a_ = Vector::Zero(n);
    a_[0] = 0.5 * R;
  }
  if (cfg_.f_center.size() == n) {
    c_ = cfg_.f_center;
  } else {
    c_ = Vector::Zero(n);
    c_[0] = -0.5 * R;
    if (n > 1) c_[1] = 0.5 * R;
  }
}

CompositeProblem DeskProblem::make_problem() const {
  const Vector a = a_;
  const Vector c = c_;
  const double L = cfg_.L;
  GradientOracle smooth([a, L](const Vector& x) { return 0.5 * L * (x - a).squaredNorm(); },
                        [a, L](const Vector& x) -> Vector { return L * (x - a); }, L);
  ValueOracle nonsmooth =
      ValueOracle::with_gaussian_noise([c](const Vector& x) { return (x - c).norm(); }, cfg_.sigma);
  CompositeProblem problem{std::move(smooth),
                           std::move(nonsmooth),
                           ProxSetup::euclidean(cfg_.n),
                           FeasibleSet::ball(Vector::Zero(cfg_.n), cfg_.radius),
                           1.0,
                           cfg_.sigma,
                           cfg_.r,
                           [c](const Vector& x, Rng&) -> Vector {
                             const Vector d = x - c;
                             const double norm = d.norm();
                             return norm > 0.0 ? Vector(d / norm) : Vector(Vector::Zero(d.size()));
                           }};
  problem.validate();
  return problem;
}

double DeskProblem::objective(const Vector& x) const {
  return 0.5 * cfg_.L * (x - a_).squaredNorm() + (x - c_).norm();
}

DeskReference DeskProblem::reference() const {
  const double L = cfg_.L;
  const double R = cfg_.radius;
  // Minimizer of (L/2)|x - a|^2 + (nu/2)|x|^2 + |x - c|, i.e. a shrinkage of
  // m - c towards 0 with m = L a / (L + nu).
  const auto solve = [&](double nu) -> Vector {
    const double kappa = L + nu;
    const Vector m = (L / kappa) * a_;
    const Vector d = m - c_;
    const double norm = d.norm();
    if (norm <= 1.0 / kappa) return c_;
    return c_ + (1.0 - 1.0 / (kappa * norm)) * d;
  };

  Vector x = solve(0.0);
  if (x.norm() > R) {
    double lo = 0.0;
    double hi = L;
    while (solve(hi).norm() > R) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw std::runtime_error("desk reference: multiplier search diverged");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (solve(mid).norm() > R ? lo : hi) = mid;
    }
    x = solve(hi);
  }
  return {x, objective(x)};
}

}  // namespace opzosa

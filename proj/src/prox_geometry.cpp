#include "opzosa/prox_geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace opzosa {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dimension(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(v.size()) +
                                " does not match " + std::to_string(n));
  }
}

void require_positive(const Vector& x, const char* what) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw std::domain_error(std::string(what) + ": entropy geometry needs strictly positive "
                              "coordinates (coordinate " + std::to_string(i) + ")");
    }
  }
}

void project_onto_ball(Eigen::Ref<Vector> x, const Vector& center, double radius) {
  const double dist = (x - center).norm();
  if (dist > radius) x = center + (radius / dist) * (x - center);
}

}  // namespace

DualExponent DualExponent::finite(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("dual exponent must be a finite value >= 1");
  }
  return DualExponent(false, q);
}

double DualExponent::value() const {
  if (infinite_) throw std::logic_error("dual exponent is infinite");
  return q_;
}

ProxSetup ProxSetup::euclidean(Index n) {
  if (n < 1) throw std::invalid_argument("ProxSetup: dimension must be positive");
  return ProxSetup(NormKind::euclidean, n);
}

ProxSetup ProxSetup::entropy(Index n) {
  if (n < 1) throw std::invalid_argument("ProxSetup: dimension must be positive");
  return ProxSetup(NormKind::l1_entropy, n);
}

DualExponent ProxSetup::dual_exponent() const {
  return kind_ == NormKind::euclidean ? DualExponent::finite(2.0) : DualExponent::infinity();
}

double ProxSetup::norm(const Vector& v) const {
  require_dimension(v, n_, "norm");
  return kind_ == NormKind::euclidean ? v.norm() : v.lpNorm<1>();
}

double ProxSetup::distance_generator(const Vector& x) const {
  require_dimension(x, n_, "distance_generator");
  if (kind_ == NormKind::euclidean) return 0.5 * x.squaredNorm();
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::domain_error("negative entropy of a negative coordinate");
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  }
  return s;
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  return FeasibleSet(Ball{std::move(center), radius});
}

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  if ((hi.array() < lo.array()).any()) throw std::invalid_argument("box has lo > hi");
  return FeasibleSet(Box{std::move(lo), std::move(hi)});
}

FeasibleSet FeasibleSet::simplex(Index n) {
  if (n < 1) throw std::invalid_argument("simplex dimension must be positive");
  return FeasibleSet(Simplex{n});
}

FeasibleSet FeasibleSet::block_balls(Index blocks, Index block_dim, double radius) {
  if (blocks < 1 || block_dim < 1) throw std::invalid_argument("block_balls: empty shape");
  if (!(radius > 0.0)) throw std::invalid_argument("block_balls: radius must be positive");
  return FeasibleSet(BlockBalls{blocks, block_dim, radius});
}

Index FeasibleSet::dimension() const {
  return std::visit(overloaded{
                        [](const Ball& b) { return b.center.size(); },
                        [](const Box& b) { return b.lo.size(); },
                        [](const Simplex& s) { return s.n; },
                        [](const BlockBalls& b) { return b.blocks * b.block_dim; },
                    },
                    shape_);
}

Vector FeasibleSet::center() const {
  return std::visit(overloaded{
                        [](const Ball& b) -> Vector { return b.center; },
                        [](const Box& b) -> Vector { return 0.5 * (b.lo + b.hi); },
                        [](const Simplex& s) -> Vector {
                          return Vector::Constant(s.n, 1.0 / static_cast<double>(s.n));
                        },
                        [](const BlockBalls& b) -> Vector {
                          return Vector::Zero(b.blocks * b.block_dim);
                        },
                    },
                    shape_);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{
          [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
          [&](const Box& b) {
            return (x.array() >= b.lo.array() - tol).all() &&
                   (x.array() <= b.hi.array() + tol).all();
          },
          [&](const Simplex&) {
            return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
          },
          [&](const BlockBalls& b) {
            for (Index m = 0; m < b.blocks; ++m) {
              if (x.segment(m * b.block_dim, b.block_dim).norm() > b.radius + tol) return false;
            }
            return true;
          },
      },
      shape_);
}

void FeasibleSet::project(Vector& x) const {
  require_dimension(x, dimension(), "project");
  std::visit(overloaded{
                 [&](const Ball& b) { project_onto_ball(x, b.center, b.radius); },
                 [&](const Box& b) { x = x.cwiseMax(b.lo).cwiseMin(b.hi); },
                 [&](const Simplex&) {
                   throw std::invalid_argument("Euclidean projection onto the simplex is not supported");
                 },
                 [&](const BlockBalls& b) {
                   for (Index m = 0; m < b.blocks; ++m) {
                     auto block = x.segment(m * b.block_dim, b.block_dim);
                     const double norm = block.norm();
                     if (norm > b.radius) block *= b.radius / norm;
                   }
                 },
             },
             shape_);
}

void FeasibleSet::check_compatible(const ProxSetup& setup) const {
  if (setup.dimension() != dimension()) {
    throw std::invalid_argument("feasible set and prox setup differ in dimension");
  }
  const bool is_simplex = std::holds_alternative<Simplex>(shape_);
  if (setup.kind() == NormKind::l1_entropy && !is_simplex) {
    throw std::invalid_argument("entropy geometry requires the simplex");
  }
  if (setup.kind() == NormKind::euclidean && is_simplex) {
    throw std::invalid_argument("Euclidean geometry on the simplex is not supported");
  }
}

double FeasibleSet::bregman_diameter(const ProxSetup& setup) const {
  check_compatible(setup);
  return std::visit(overloaded{
                        [](const Ball& b) { return 2.0 * b.radius; },
                        [](const Box& b) { return (b.hi - b.lo).norm(); },
                        [](const Simplex& s) {
                          return std::sqrt(2.0 * std::log(static_cast<double>(s.n)));
                        },
                        [](const BlockBalls& b) {
                          return 2.0 * b.radius * std::sqrt(static_cast<double>(b.blocks));
                        },
                    },
                    shape_);
}

double dual_norm(const Vector& v, const ProxSetup& setup) {
  require_dimension(v, setup.dimension(), "dual_norm");
  if (setup.dual_exponent().is_infinite()) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  return v.norm();
}

double bregman(const ProxSetup& setup, const Vector& x, const Vector& y) {
  require_dimension(x, setup.dimension(), "bregman");
  require_dimension(y, setup.dimension(), "bregman");
  if (setup.kind() == NormKind::euclidean) return 0.5 * (y - x).squaredNorm();

  require_positive(x, "bregman");
  // Generalized KL; equals KL(y || x) when both sum to one.
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (y[i] < 0.0) throw std::domain_error("bregman: negative coordinate in y");
    if (y[i] > 0.0) v += y[i] * std::log(y[i] / x[i]);
    v += x[i] - y[i];
  }
  return v < 0.0 ? 0.0 : v;
}

void composite_prox(const ProxSetup& setup, const FeasibleSet& set, const Vector& a,
                    double beta, double p, const Vector& x, const Vector& z, Vector& out) {
  if (!(beta > 0.0)) throw std::invalid_argument("composite_prox: beta must be positive");
  if (!(p >= 0.0)) throw std::invalid_argument("composite_prox: p must be nonnegative");
  const Index n = setup.dimension();
  require_dimension(a, n, "composite_prox");
  require_dimension(x, n, "composite_prox");
  require_dimension(z, n, "composite_prox");

  if (setup.kind() == NormKind::euclidean) {
    out = (x + p * z - (1.0 / beta) * a) * (1.0 / (1.0 + p));
    set.project(out);
    return;
  }

  if (!std::holds_alternative<FeasibleSet::Simplex>(set.shape())) {
    throw std::invalid_argument("entropy geometry requires the simplex");
  }
  require_positive(x, "composite_prox");
  require_positive(z, "composite_prox");
  out.resize(n);
  const double w = 1.0 / (1.0 + p);
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    out[i] = w * (std::log(x[i]) + p * std::log(z[i]) - a[i] / beta);
    top = std::max(top, out[i]);
  }
  double mass = 0.0;
  for (Index i = 0; i < n; ++i) mass += std::exp(out[i] - top);
  const double log_norm = top + std::log(mass);
  const double log_floor = std::log(kSimplexFloor);
  for (Index i = 0; i < n; ++i) out[i] = std::exp(std::max(out[i] - log_norm, log_floor));
}

Vector composite_prox(const ProxSetup& setup, const FeasibleSet& set, const Vector& a,
                      double beta, double p, const Vector& x, const Vector& z) {
  Vector out;
  composite_prox(setup, set, a, beta, p, x, z, out);
  return out;
}

double p_squared(Index n, const ProxSetup& setup) {
  if (n < 2) throw std::invalid_argument("p_squared: n must be at least 2");
  const double dn = static_cast<double>(n);
  const double log_term = 32.0 * std::log(dn) - 8.0;
  const DualExponent q = setup.dual_exponent();
  const double lead = q.is_infinite() ? log_term : std::min(2.0 * q.value() - 1.0, log_term);
  return lead * std::pow(dn, q.two_over_q() - 1.0);
}

}  // namespace opzosa

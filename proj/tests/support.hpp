#pragma once

// Independent reference computations shared by the tests.

#include "opzosa/prox_geometry.hpp"
#include "opzosa/sampling.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace testing_support {

using opzosa::Index;
using opzosa::Matrix;
using opzosa::Rng;
using opzosa::Vector;

/// Minimizer of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             int iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Minimum of a convex function over the disc of radius R centred at 0:
/// golden section on x0, with an inner golden section on x1 over the chord.
inline Vector disc_minimizer(const std::function<double(const Vector&)>& f, double R) {
  const auto inner = [&](double x0, double* value) {
    const double half = std::sqrt(std::max(0.0, R * R - x0 * x0));
    Vector p(2);
    const double x1 = golden_section(
        [&](double t) {
          p << x0, t;
          return f(p);
        },
        -half, half);
    p << x0, x1;
    if (value) *value = f(p);
    return x1;
  };
  const double x0 = golden_section(
      [&](double t) {
        double v = 0.0;
        inner(t, &v);
        return v;
      },
      -R, R);
  Vector out(2);
  out << x0, inner(x0, nullptr);
  return out;
}

/// Generic minimizer of a smooth strictly convex function on the open
/// simplex: damped Newton in the coordinates u_1..u_{n-1}, u_n = 1 - sum.
/// `grad` and `hess_diag` describe a separable objective sum_i phi_i(u_i).
inline Vector simplex_newton(const std::function<double(const Vector&)>& value,
                             const std::function<Vector(const Vector&)>& grad,
                             const std::function<Vector(const Vector&)>& hess_diag, Vector u,
                             int iterations = 200) {
  const Index n = u.size();
  const auto full = [n](const Vector& y) {
    Vector out(n);
    out.head(n - 1) = y;
    out[n - 1] = 1.0 - y.sum();
    return out;
  };
  Vector y = u.head(n - 1);
  for (int it = 0; it < iterations; ++it) {
    const Vector uu = full(y);
    const Vector g = grad(uu);
    const Vector h = hess_diag(uu);
    // Chain rule through u_n = 1 - sum(y).
    const Vector gy = g.head(n - 1).array() - g[n - 1];
    Matrix H = h.head(n - 1).asDiagonal();
    H.array() += h[n - 1];
    const Vector step = H.ldlt().solve(-gy);
    if (step.norm() < 1e-16) break;
    double t = 1.0;
    const double f0 = value(uu);
    while (t > 1e-20) {
      const Vector cand = full(y + t * step);
      if ((cand.array() > 0.0).all() && value(cand) <= f0 + 1e-4 * t * gy.dot(step)) break;
      t *= 0.5;
    }
    y += t * step;
  }
  return full(y);
}

/// Point drawn uniformly from the open simplex.
inline Vector random_simplex_point(Index n, Rng& rng) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = -std::log(1.0 - opzosa::uniform01(rng));
  return x / x.sum();
}

/// Point drawn uniformly from the ball of radius R at `center`.
inline Vector random_ball_point(const Vector& center, double R, Rng& rng) {
  const Index n = center.size();
  const Vector e = opzosa::sample_sphere(n, rng);
  const double rho = R * std::pow(opzosa::uniform01(rng), 1.0 / static_cast<double>(n));
  return center + rho * e;
}

inline Vector random_normal_vector(Index n, Rng& rng, double scale = 1.0) {
  opzosa::NormalDistribution normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace testing_support

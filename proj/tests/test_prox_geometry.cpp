#include "doctest.h"

#include "opzosa/prox_geometry.hpp"
#include "support.hpp"

#include <cmath>
#include <stdexcept>

using namespace opzosa;
using testing_support::random_ball_point;
using testing_support::random_normal_vector;
using testing_support::random_simplex_point;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("dual_norm examples") {
  CHECK(dual_norm(vec({3, 4}), ProxSetup::euclidean(2)) == doctest::Approx(5.0));
  CHECK(dual_norm(vec({3, -4}), ProxSetup::entropy(2)) == 4.0);
  CHECK(dual_norm(Vector::Zero(3), ProxSetup::euclidean(3)) == 0.0);
  CHECK(dual_norm(Vector::Zero(3), ProxSetup::entropy(3)) == 0.0);
  CHECK_THROWS_AS(dual_norm(vec({1, 2, 3}), ProxSetup::euclidean(2)), std::invalid_argument);
}

TEST_CASE("dual exponents") {
  CHECK(ProxSetup::euclidean(4).dual_exponent().value() == 2.0);
  CHECK(ProxSetup::entropy(4).dual_exponent().is_infinite());
}

TEST_CASE("bregman examples") {
  CHECK(bregman(ProxSetup::euclidean(2), vec({0, 0}), vec({2, 0})) == doctest::Approx(2.0));
  const auto ent = ProxSetup::entropy(2);
  CHECK(bregman(ent, vec({0.5, 0.5}), vec({0.5, 0.5})) == doctest::Approx(0.0));
  const double kl = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  CHECK(bregman(ent, vec({0.5, 0.5}), vec({0.9, 0.1})) == doctest::Approx(kl).epsilon(1e-12));
  CHECK(kl == doctest::Approx(0.368).epsilon(1e-3));
  CHECK_THROWS_AS(bregman(ent, vec({1.0, 0.0}), vec({0.5, 0.5})), std::domain_error);
}

TEST_CASE("composite_prox examples") {
  const auto euc = ProxSetup::euclidean(2);
  const auto big = FeasibleSet::ball(Vector::Zero(2), 1e12);
  const Vector u = composite_prox(euc, big, vec({1, 0}), 1.0, 1.0, vec({0, 0}), vec({2, 0}));
  CHECK(u[0] == doctest::Approx(0.5));
  CHECK(u[1] == doctest::Approx(0.0));

  const auto ent = ProxSetup::entropy(4);
  const Vector uniform = Vector::Constant(4, 0.25);
  const Vector w = composite_prox(ent, FeasibleSet::simplex(4), Vector::Zero(4), 1.0, 0.7,
                                  uniform, uniform);
  for (Index i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(0.25).epsilon(1e-14));

  const auto unit = FeasibleSet::ball(Vector::Zero(2), 1.0);
  const Vector v = composite_prox(euc, unit, vec({-4, 0}), 1.0, 0.0, vec({0, 0}), vec({0, 0}));
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(0.0));

  CHECK_THROWS_AS(composite_prox(euc, unit, vec({0, 0}), 0.0, 0.0, vec({0, 0}), vec({0, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(composite_prox(euc, unit, vec({0, 0}), 1.0, -1.0, vec({0, 0}), vec({0, 0})),
                  std::invalid_argument);
}

TEST_CASE("p_squared examples") {
  CHECK(p_squared(100, ProxSetup::euclidean(100)) == 3.0);
  CHECK(p_squared(100, ProxSetup::entropy(100)) ==
        doctest::Approx((32.0 * std::log(100.0) - 8.0) / 100.0));
  CHECK(p_squared(100, ProxSetup::entropy(100)) == doctest::Approx(1.3936).epsilon(1e-4));
  CHECK(p_squared(2, ProxSetup::euclidean(2)) == 3.0);
  CHECK_THROWS_AS(p_squared(1, ProxSetup::euclidean(1)), std::invalid_argument);
}

TEST_CASE("strong convexity and nonnegativity of V on sampled pairs") {
  Rng rng(11);
  for (Index n : {2, 5, 20}) {
    const auto euc = ProxSetup::euclidean(n);
    const auto ent = ProxSetup::entropy(n);
    for (int s = 0; s < 2000; ++s) {
      const Vector x = random_ball_point(Vector::Zero(n), 3.0, rng);
      const Vector y = random_ball_point(Vector::Zero(n), 3.0, rng);
      const double v = bregman(euc, x, y);
      CHECK(v >= 0.5 * (x - y).squaredNorm() * (1.0 - 1e-12));
      CHECK(bregman(euc, x, x) == 0.0);

      const Vector p = random_simplex_point(n, rng);
      const Vector q = random_simplex_point(n, rng);
      const double l1 = (p - q).lpNorm<1>();
      CHECK(bregman(ent, p, q) >= 0.5 * l1 * l1 - 1e-12);
      CHECK(std::abs(bregman(ent, p, p)) <= 1e-15);
    }
  }
}

TEST_CASE("bregman diameter bounds sampled divergences") {
  Rng rng(12);
  const Index n = 6;
  const auto euc = ProxSetup::euclidean(n);
  const auto ball = FeasibleSet::ball(Vector::Constant(n, 0.3), 2.0);
  const auto box = FeasibleSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 2.0));
  const auto blocks = FeasibleSet::block_balls(3, 2, 1.5);
  CHECK(ball.bregman_diameter(euc) == doctest::Approx(4.0));
  for (int s = 0; s < 5000; ++s) {
    const Vector x = random_ball_point(Vector::Constant(n, 0.3), 2.0, rng);
    const Vector y = random_ball_point(Vector::Constant(n, 0.3), 2.0, rng);
    CHECK(ball.bregman_diameter(euc) >= std::sqrt(2.0 * bregman(euc, x, y)));

    Vector bx(n);
    Vector by(n);
    for (Index i = 0; i < n; ++i) {
      bx[i] = -1.0 + 3.0 * uniform01(rng);
      by[i] = -1.0 + 3.0 * uniform01(rng);
    }
    CHECK(box.bregman_diameter(euc) >= std::sqrt(2.0 * bregman(euc, bx, by)));

    Vector px(n);
    Vector py(n);
    for (Index m = 0; m < 3; ++m) {
      px.segment(2 * m, 2) = random_ball_point(Vector::Zero(2), 1.5, rng);
      py.segment(2 * m, 2) = random_ball_point(Vector::Zero(2), 1.5, rng);
    }
    CHECK(blocks.bregman_diameter(euc) >= std::sqrt(2.0 * bregman(euc, px, py)));
  }
  const auto ent = ProxSetup::entropy(n);
  const auto simplex = FeasibleSet::simplex(n);
  const Vector c = simplex.center();
  for (int s = 0; s < 5000; ++s) {
    const Vector y = random_simplex_point(n, rng);
    CHECK(simplex.bregman_diameter(ent) >= std::sqrt(2.0 * bregman(ent, c, y)));
  }
}

TEST_CASE("projections") {
  const auto ball = FeasibleSet::ball(Vector::Zero(2), 1.0);
  Vector x = vec({3, 4});
  ball.project(x);
  CHECK(x[0] == doctest::Approx(0.6));
  CHECK(x[1] == doctest::Approx(0.8));
  const auto box = FeasibleSet::box(vec({0, 0}), vec({1, 1}));
  Vector y = vec({-2, 0.5});
  box.project(y);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.5);
  const auto blocks = FeasibleSet::block_balls(2, 2, 1.0);
  Vector z = vec({0.1, 0.2, 0, 2});
  blocks.project(z);
  CHECK(z[0] == 0.1);
  CHECK(z[3] == doctest::Approx(1.0));
  CHECK(blocks.contains(z));
  CHECK_FALSE(ball.contains(vec({1.1, 0})));
}

TEST_CASE("prox with p = 0 and a = 0 returns x") {
  Rng rng(13);
  const Index n = 7;
  const auto euc = ProxSetup::euclidean(n);
  const auto ball = FeasibleSet::ball(Vector::Zero(n), 2.0);
  const auto ent = ProxSetup::entropy(n);
  const auto simplex = FeasibleSet::simplex(n);
  for (int s = 0; s < 200; ++s) {
    const Vector x = random_ball_point(Vector::Zero(n), 2.0, rng);
    const Vector z = random_ball_point(Vector::Zero(n), 2.0, rng);
    const Vector u = composite_prox(euc, ball, Vector::Zero(n), 0.7, 0.0, x, z);
    CHECK(u == x);
    const Vector p = random_simplex_point(n, rng);
    const Vector q = random_simplex_point(n, rng);
    const Vector w = composite_prox(ent, simplex, Vector::Zero(n), 0.7, 0.0, p, q);
    // Entropy prox goes through log/exp, so agreement is to rounding.
    CHECK((w - p).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("entropy prox matches a generic minimizer") {
  Rng rng(14);
  for (int s = 0; s < 50; ++s) {
    const Index n = 2 + static_cast<Index>(rng() % 8);
    const auto ent = ProxSetup::entropy(n);
    const Vector x = random_simplex_point(n, rng);
    const Vector z = random_simplex_point(n, rng);
    const Vector a = random_normal_vector(n, rng);
    const double beta = 0.5 + 2.0 * uniform01(rng);
    const double p = 3.0 * uniform01(rng);

    const auto value = [&](const Vector& u) {
      double s2 = a.dot(u);
      for (Index i = 0; i < n; ++i) {
        s2 += beta * u[i] * std::log(u[i] / x[i]) + beta * p * u[i] * std::log(u[i] / z[i]);
      }
      return s2;
    };
    const auto grad = [&](const Vector& u) {
      Vector g(n);
      for (Index i = 0; i < n; ++i) {
        g[i] = a[i] + beta * (std::log(u[i] / x[i]) + 1.0) + beta * p * (std::log(u[i] / z[i]) + 1.0);
      }
      return g;
    };
    const auto hess = [&](const Vector& u) -> Vector {
      return (beta * (1.0 + p)) * u.cwiseInverse();
    };
    const Vector reference = testing_support::simplex_newton(value, grad, hess,
                                                             Vector::Constant(n, 1.0 / n));
    const Vector u = composite_prox(ent, FeasibleSet::simplex(n), a, beta, p, x, z);
    CHECK((u - reference).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("entropy prox survives extreme linear terms") {
  const auto ent = ProxSetup::entropy(3);
  const Vector uniform = Vector::Constant(3, 1.0 / 3.0);
  const Vector u = composite_prox(ent, FeasibleSet::simplex(3), vec({-1e6, 0, 1e6}), 1.0, 0.0,
                                  uniform, uniform);
  CHECK(u.allFinite());
  CHECK(u[0] == doctest::Approx(1.0));
  CHECK(FeasibleSet::simplex(3).contains(u));
}

TEST_CASE("prox outputs are feasible") {
  Rng rng(15);
  const Index n = 5;
  const auto euc = ProxSetup::euclidean(n);
  const auto ball = FeasibleSet::ball(Vector::Constant(n, 1.0), 0.5);
  const auto box = FeasibleSet::box(Vector::Zero(n), Vector::Constant(n, 1.0));
  const auto ent = ProxSetup::entropy(n);
  const auto simplex = FeasibleSet::simplex(n);
  for (int s = 0; s < 1000; ++s) {
    const Vector a = random_normal_vector(n, rng, 10.0);
    const Vector x = random_ball_point(Vector::Constant(n, 1.0), 0.5, rng);
    const Vector z = random_ball_point(Vector::Constant(n, 1.0), 0.5, rng);
    CHECK(ball.contains(composite_prox(euc, ball, a, 0.3, 1.5, x, z), 1e-10));
    Vector bx = x;
    Vector bz = z;
    box.project(bx);
    box.project(bz);
    CHECK(box.contains(composite_prox(euc, box, a, 0.3, 1.5, bx, bz), 1e-10));
    const Vector p = random_simplex_point(n, rng);
    const Vector q = random_simplex_point(n, rng);
    CHECK(simplex.contains(composite_prox(ent, simplex, a, 0.3, 1.5, p, q), 1e-10));
  }
}

TEST_CASE("incompatible geometry is rejected") {
  CHECK_THROWS(FeasibleSet::simplex(3).check_compatible(ProxSetup::euclidean(3)));
  CHECK_THROWS(FeasibleSet::ball(Vector::Zero(3), 1.0).check_compatible(ProxSetup::entropy(3)));
  CHECK_THROWS(FeasibleSet::ball(Vector::Zero(3), 1.0).check_compatible(ProxSetup::euclidean(4)));
}

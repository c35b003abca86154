#pragma once

#include <Eigen/Dense>

#include <variant>

namespace opzosa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class NormKind { euclidean, l1_entropy };

/// Hölder exponent q of the dual norm. Infinity is a tag, never a float, so
/// quantities like 2/q are defined by case analysis.
class DualExponent {
 public:
  static DualExponent finite(double q);
  static constexpr DualExponent infinity() { return DualExponent(true, 0.0); }

  bool is_infinite() const { return infinite_; }
  /// Throws std::logic_error when infinite.
  double value() const;
  /// 2/q, with 2/inf == 0.
  double two_over_q() const { return infinite_ ? 0.0 : 2.0 / q_; }

  bool operator==(const DualExponent&) const = default;

 private:
  constexpr DualExponent(bool infinite, double q) : infinite_(infinite), q_(q) {}
  bool infinite_;
  double q_;
};

/// Norm, dual norm and distance-generating function of the problem geometry.
///
/// The Euclidean setup uses nu(x) = 0.5 |x|_2^2 with the l2 norm. The entropy
/// setup uses the negative entropy sum x_i ln x_i, 1-strongly convex w.r.t.
/// the l1 norm on the simplex, whose dual is l_inf.
class ProxSetup {
 public:
  static ProxSetup euclidean(Index n);
  static ProxSetup entropy(Index n);

  NormKind kind() const { return kind_; }
  Index dimension() const { return n_; }
  DualExponent dual_exponent() const;

  double norm(const Vector& v) const;
  double distance_generator(const Vector& x) const;

 private:
  ProxSetup(NormKind kind, Index n) : kind_(kind), n_(n) {}
  NormKind kind_;
  Index n_;
};

class FeasibleSet {
 public:
  struct Ball {
    Vector center;
    double radius;
  };
  struct Box {
    Vector lo;
    Vector hi;
  };
  struct Simplex {
    Index n;
  };
  /// Cartesian product of `blocks` Euclidean balls of dimension block_dim,
  /// all centred at the origin. Points are stored block after block.
  struct BlockBalls {
    Index blocks;
    Index block_dim;
    double radius;
  };

  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet simplex(Index n);
  static FeasibleSet block_balls(Index blocks, Index block_dim, double radius);

  Index dimension() const;
  /// Ball/box/block centre, or the uniform point of the simplex.
  Vector center() const;
  bool contains(const Vector& x, double tol = 1e-10) const;

  /// Euclidean projection (closed form). Not available for the simplex.
  void project(Vector& x) const;

  /// D_{X,V}: max sqrt(2 V(x, y)) over the set. For the entropy simplex this
  /// is the usual sqrt(2 ln n), measured from the uniform centre.
  double bregman_diameter(const ProxSetup& setup) const;

  /// Throws std::invalid_argument unless the pair is supported: Euclidean
  /// with ball/box/block_balls, or entropy with the simplex.
  void check_compatible(const ProxSetup& setup) const;

  const std::variant<Ball, Box, Simplex, BlockBalls>& shape() const { return shape_; }

 private:
  explicit FeasibleSet(std::variant<Ball, Box, Simplex, BlockBalls> shape)
      : shape_(std::move(shape)) {}
  std::variant<Ball, Box, Simplex, BlockBalls> shape_;
};

/// Dual norm |v|_q: l2 for q = 2, l_inf for q = inf.
double dual_norm(const Vector& v, const ProxSetup& setup);

/// Bregman divergence V(x, y) = nu(y) - nu(x) - <grad nu(x), y - x>.
/// The entropy setup throws std::domain_error if some x_i <= 0.
double bregman(const ProxSetup& setup, const Vector& x, const Vector& y);

/// argmin over the set of <a, u> + beta V(x, u) + beta p V(z, u).
void composite_prox(const ProxSetup& setup, const FeasibleSet& set, const Vector& a,
                    double beta, double p, const Vector& x, const Vector& z, Vector& out);
Vector composite_prox(const ProxSetup& setup, const FeasibleSet& set, const Vector& a,
                      double beta, double p, const Vector& x, const Vector& z);

/// p^2(n) = min{2q - 1, 32 ln n - 8} n^{2/q - 1}. Requires n >= 2.
double p_squared(Index n, const ProxSetup& setup);

/// Coordinates of simplex points are floored at this value.
inline constexpr double kSimplexFloor = 1e-300;

}  // namespace opzosa

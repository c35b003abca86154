#pragma once

#include "opzosa/prox_geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace opzosa {

enum class Topology { star, cycle, chain, complete };

/// Accepts "star", "cycle", "chain" (alias "path") and "complete".
Topology parse_topology(std::string_view name);
std::string_view topology_name(Topology t);

/// Symmetric PSD gossip matrix with W 1 = 0: the graph Laplacian Deg - Adj.
struct GossipMatrix {
  Matrix W;
  double lambda_max;
  Topology topology;

  Index size() const { return W.rows(); }
  /// Smallest strictly positive eigenvalue, by full eigendecomposition.
  double lambda_min_positive() const;
};

/// Laplacian of the named graph on M >= 2 nodes. For the star node 0 is the
/// hub; a cycle on two nodes is the single edge.
GossipMatrix build_gossip(Topology topology, Index M);

struct PowerIterationResult {
  double eigenvalue;
  int iterations;
  bool converged;
};

/// Dominant eigenvalue of a symmetric PSD matrix with a deterministic start
/// vector orthogonal to the all-ones vector. Stops once the eigen-residual
/// |Wv - mu v| falls below tol * mu.
PowerIterationResult power_iteration(const Matrix& W, double tol = 1e-10,
                                     int max_iterations = 1'000'000);

/// Writes W row-major, space separated, one row per line.
void write_matrix(std::ostream& os, const Matrix& W);

/// M x n matrix whose row m is the local variable of device m.
using StackedPoint = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Views of a flat vector (blocks of n) as an M x n stacked point.
inline Eigen::Map<const StackedPoint> as_stacked(const Vector& x, Index M, Index n) {
  return Eigen::Map<const StackedPoint>(x.data(), M, n);
}
inline Eigen::Map<StackedPoint> as_stacked(Vector& x, Index M, Index n) {
  return Eigen::Map<StackedPoint>(x.data(), M, n);
}

/// Counts communication rounds (one per penalty-gradient evaluation).
class CommCounter {
 public:
  void tick() { ++rounds_; }
  std::int64_t rounds() const { return rounds_; }

 private:
  std::int64_t rounds_ = 0;
};

struct PenaltyEval {
  double value;
  StackedPoint grad;
};

/// (lambda / M) sum_m |x_m - xbar|^2 and its gradient (2 lambda / M)(x_m - xbar).
PenaltyEval centralized_penalty(const StackedPoint& X, double lambda, CommCounter* comm = nullptr);

/// Scaling convention of the decentralized penalty; the two differ by 2.
enum class PenaltyScale {
  full,  // lambda tr(X^T W X), gradient 2 lambda W X
  half,  // (lambda / 2) tr(X^T W X), gradient lambda W X
};

PenaltyScale parse_penalty_scale(std::string_view name);
std::string_view penalty_scale_name(PenaltyScale s);

PenaltyEval decentralized_penalty(const StackedPoint& X, double lambda, const GossipMatrix& W,
                                  PenaltyScale scale, CommCounter* comm = nullptr);

/// Lipschitz constant of the decentralized penalty gradient (Frobenius norm).
double decentralized_smoothness(double lambda, const GossipMatrix& W, PenaltyScale scale);
/// Lipschitz constant of the centralized penalty gradient: 2 lambda / M.
double centralized_smoothness(double lambda, Index M);

/// max_m |x_m - xbar|_2.
double consensus_gap(const StackedPoint& X);

}  // namespace opzosa

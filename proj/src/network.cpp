#include "opzosa/network.hpp"

#include "opzosa/sampling.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace opzosa {

Topology parse_topology(std::string_view name) {
  if (name == "star") return Topology::star;
  if (name == "cycle") return Topology::cycle;
  if (name == "chain" || name == "path") return Topology::chain;
  if (name == "complete") return Topology::complete;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::star: return "star";
    case Topology::cycle: return "cycle";
    case Topology::chain: return "chain";
    case Topology::complete: return "complete";
  }
  return "?";
}

PenaltyScale parse_penalty_scale(std::string_view name) {
  if (name == "full") return PenaltyScale::full;
  if (name == "half") return PenaltyScale::half;
  throw std::invalid_argument("unknown penalty scale '" + std::string(name) +
                              "' (expected full or half)");
}

std::string_view penalty_scale_name(PenaltyScale s) {
  return s == PenaltyScale::full ? "full" : "half";
}

PowerIterationResult power_iteration(const Matrix& W, double tol, int max_iterations) {
  const Index M = W.rows();
  if (M < 1 || W.cols() != M) throw std::invalid_argument("power_iteration: W must be square");
  Rng rng(0x5eed);
  NormalDistribution normal;
  Vector v(M);
  for (Index i = 0; i < M; ++i) v[i] = normal(rng);
  v.array() -= v.mean();
  v.normalize();

  Vector w(M);
  double mu = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    w.noalias() = W * v;
    mu = v.dot(w);
    const double residual = (w - mu * v).norm();
    if (residual <= tol * std::abs(mu)) return {mu, it, true};
    const double norm = w.norm();
    if (norm == 0.0) return {0.0, it, true};
    v = w / norm;
  }
  return {mu, max_iterations, false};
}

GossipMatrix build_gossip(Topology topology, Index M) {
  if (M < 2) throw std::invalid_argument("build_gossip: need at least two nodes");
  Matrix adj = Matrix::Zero(M, M);
  const auto connect = [&](Index i, Index j) { adj(i, j) = adj(j, i) = 1.0; };
  switch (topology) {
    case Topology::star:
      for (Index i = 1; i < M; ++i) connect(0, i);
      break;
    case Topology::chain:
      for (Index i = 0; i + 1 < M; ++i) connect(i, i + 1);
      break;
    case Topology::cycle:
      for (Index i = 0; i < M; ++i) connect(i, (i + 1) % M);
      break;
    case Topology::complete:
      adj.setOnes();
      adj.diagonal().setZero();
      break;
  }
  GossipMatrix g;
  g.W = Matrix(adj.rowwise().sum().asDiagonal()) - adj;
  g.topology = topology;
  const PowerIterationResult dominant = power_iteration(g.W);
  if (!dominant.converged) throw std::runtime_error("build_gossip: power iteration did not converge");
  g.lambda_max = dominant.eigenvalue;
  return g;
}

double GossipMatrix::lambda_min_positive() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(W, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  const double cutoff = 1e-9 * ev.cwiseAbs().maxCoeff();
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff) return ev[i];
  }
  throw std::runtime_error("gossip matrix has no positive eigenvalue");
}

void write_matrix(std::ostream& os, const Matrix& W) {
  for (Index i = 0; i < W.rows(); ++i) {
    for (Index j = 0; j < W.cols(); ++j) {
      if (j > 0) os << ' ';
      os << fmt::format("{}", W(i, j));
    }
    os << '\n';
  }
}

PenaltyEval centralized_penalty(const StackedPoint& X, double lambda, CommCounter* comm) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("penalty: lambda must be nonnegative");
  const double M = static_cast<double>(X.rows());
  const Eigen::RowVectorXd mean = X.colwise().mean();
  StackedPoint centered = X.rowwise() - mean;
  PenaltyEval out{lambda / M * centered.squaredNorm(), (2.0 * lambda / M) * centered};
  if (comm) comm->tick();
  return out;
}

PenaltyEval decentralized_penalty(const StackedPoint& X, double lambda, const GossipMatrix& W,
                                  PenaltyScale scale, CommCounter* comm) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("penalty: lambda must be nonnegative");
  if (W.size() != X.rows()) throw std::invalid_argument("penalty: W does not match device count");
  const StackedPoint WX = W.W * X;
  const double quad = (X.array() * WX.array()).sum();  // tr(X^T W X)
  const double c = scale == PenaltyScale::full ? lambda : 0.5 * lambda;
  PenaltyEval out{c * quad, (2.0 * c) * WX};
  if (comm) comm->tick();
  return out;
}

double decentralized_smoothness(double lambda, const GossipMatrix& W, PenaltyScale scale) {
  return (scale == PenaltyScale::full ? 2.0 : 1.0) * lambda * W.lambda_max;
}

double centralized_smoothness(double lambda, Index M) {
  return 2.0 * lambda / static_cast<double>(M);
}

double consensus_gap(const StackedPoint& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return (X.rowwise() - mean).rowwise().norm().maxCoeff();
}

}  // namespace opzosa

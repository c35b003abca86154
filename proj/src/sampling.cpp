#include "opzosa/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace opzosa {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  for (std::uint64_t i = 0; i < 4; ++i) s_[i] = derive_seed(seed, i);
}

double chi_squared(Rng& rng, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_squared: dof must be positive");
  NormalDistribution normal;
  // Gamma(a) for a < 1 via Gamma(a + 1) * U^(1/a).
  const double shape = 0.5 * dof;
  const double a = shape < 1.0 ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double g = 0.0;
  for (;;) {
    const double z = normal(rng);
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * z * z * z * z ||
        std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
      g = d * v;
      break;
    }
  }
  if (shape < 1.0) g *= std::pow(1.0 - uniform01(rng), 1.0 / shape);
  return 2.0 * g;
}

EstimatorStreams EstimatorStreams::from_seed(std::uint64_t root) {
  return EstimatorStreams{Rng(derive_seed(root, 0)), Rng(derive_seed(root, 1)),
                          Rng(derive_seed(root, 2))};
}

void sample_sphere(Rng& rng, Vector& out) {
  if (out.size() < 1) throw std::invalid_argument("sample_sphere: dimension must be positive");
  NormalDistribution normal;
  double norm_sq = 0.0;
  // A zero Gaussian vector has probability zero; redraw if it happens anyway.
  while (!(norm_sq > 0.0)) {
    for (Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
    norm_sq = out.squaredNorm();
  }
  if (out.size() == 1) {
    out[0] = out[0] > 0.0 ? 1.0 : -1.0;
    return;
  }
  out *= 1.0 / std::sqrt(norm_sq);
}

Vector sample_sphere(Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_sphere: dimension must be positive");
  Vector e(n);
  sample_sphere(rng, e);
  return e;
}

ValueOracle ValueOracle::with_gaussian_noise(Objective f, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  NoisyObjective noisy = [f, sigma](const Vector& x, Rng& rng) {
    if (sigma == 0.0) return f(x);
    NormalDistribution normal(0.0, sigma);
    return f(x) + normal(rng);
  };
  return ValueOracle(std::move(noisy), std::move(f), sigma);
}

ValueOracle::ValueOracle(NoisyObjective noisy, Objective noiseless, double sigma)
    : noisy_(std::move(noisy)), noiseless_(std::move(noiseless)), sigma_(sigma) {
  if (!noisy_ || !noiseless_) throw std::invalid_argument("ValueOracle: empty objective");
  if (!(sigma_ >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
}

double ValueOracle::query(const Vector& x, Rng& noise) {
  ++calls_;
  return noisy_(x, noise);
}

GradientOracle::GradientOracle(Value value, Gradient gradient, double smoothness)
    : value_(std::move(value)), gradient_(std::move(gradient)), smoothness_(smoothness) {
  if (!value_ || !gradient_) throw std::invalid_argument("GradientOracle: empty function");
  if (!(smoothness_ > 0.0)) throw std::invalid_argument("GradientOracle: L must be positive");
}

Vector GradientOracle::gradient(const Vector& x) {
  ++calls_;
  return gradient_(x);
}

void EstimatorConfig::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("estimator radius r must be positive");
  if (dimension < 1) throw std::invalid_argument("estimator dimension must be positive");
}

GradientEstimator::GradientEstimator(EstimatorConfig cfg)
    : cfg_(cfg),
      direction_(cfg.dimension),
      plus_(cfg.dimension),
      minus_(cfg.dimension),
      result_(cfg.dimension) {
  cfg_.validate();
}

void GradientEstimator::probe_points(const Vector& x, const Vector& e) {
  if (x.size() != cfg_.dimension || e.size() != cfg_.dimension) {
    throw std::invalid_argument("estimator: dimension mismatch");
  }
  plus_ = x + cfg_.radius * e;
  minus_ = x - cfg_.radius * e;
}

const Vector& GradientEstimator::finish(double diff, const Vector& e) {
  const double scale = static_cast<double>(cfg_.dimension) / (2.0 * cfg_.radius);
  result_ = (scale * diff) * e;
  return result_;
}

const Vector& GradientEstimator::one_point_along(ValueOracle& oracle, const Vector& x,
                                                 const Vector& e, EstimatorStreams& streams) {
  probe_points(x, e);
  const double hi = oracle.query(plus_, streams.noise_plus);
  const double lo = oracle.query(minus_, streams.noise_minus);
  return finish(hi - lo, e);
}

const Vector& GradientEstimator::two_point_along(ValueOracle& oracle, const Vector& x,
                                                 const Vector& e, EstimatorStreams& streams) {
  probe_points(x, e);
  // Replaying the same stream state gives both probes the same noise draw.
  Rng replay = streams.noise_plus;
  const double hi = oracle.query(plus_, streams.noise_plus);
  const double lo = oracle.query(minus_, replay);
  return finish(hi - lo, e);
}

const Vector& GradientEstimator::one_point(ValueOracle& oracle, const Vector& x,
                                           EstimatorStreams& streams) {
  sample_sphere(streams.sphere, direction_);
  return one_point_along(oracle, x, direction_, streams);
}

const Vector& GradientEstimator::two_point(ValueOracle& oracle, const Vector& x,
                                           EstimatorStreams& streams) {
  sample_sphere(streams.sphere, direction_);
  return two_point_along(oracle, x, direction_, streams);
}

Vector one_point_estimate(ValueOracle& oracle, const EstimatorConfig& cfg, const Vector& x,
                          EstimatorStreams& streams) {
  GradientEstimator est(cfg);
  return est.one_point(oracle, x, streams);
}

Vector two_point_estimate(ValueOracle& oracle, const EstimatorConfig& cfg, const Vector& x,
                          EstimatorStreams& streams) {
  GradientEstimator est(cfg);
  return est.two_point(oracle, x, streams);
}

MonteCarloMean smoothed_value_mc(const ValueOracle::Objective& f, const EstimatorConfig& cfg,
                                 const Vector& x, std::int64_t samples, Rng& rng) {
  cfg.validate();
  if (samples < 1) throw std::invalid_argument("smoothed_value_mc: samples must be positive");
  if (x.size() != cfg.dimension) throw std::invalid_argument("smoothed_value_mc: dimension mismatch");
  Vector e(cfg.dimension);
  Vector y(cfg.dimension);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t s = 1; s <= samples; ++s) {
    sample_sphere(rng, e);
    y = x + cfg.radius * e;
    const double v = f(y);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s);
    m2 += delta * (v - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace opzosa

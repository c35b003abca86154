#pragma once

#include "opzosa/prox_geometry.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <functional>
#include <limits>

namespace opzosa {

/// SplitMix64 step; used to derive independent child seeds from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// xoshiro256++ (Blackman and Vigna). Copyable, so a stream can be replayed.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const result_type out = rotl(s_[0] + s_[3], 23) + s_[0];
    const result_type t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

  friend bool operator==(const Xoshiro256pp&, const Xoshiro256pp&) = default;

 private:
  static result_type rotl(result_type x, int k) { return (x << k) | (x >> (64 - k)); }
  result_type s_[4];
};

using Rng = Xoshiro256pp;
using NormalDistribution = boost::random::normal_distribution<double>;

/// Uniform draw in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Chi-square draw with `dof` > 0 degrees of freedom (Marsaglia-Tsang gamma).
double chi_squared(Rng& rng, double dof);

/// The three random streams consumed by the gradient estimators.
struct EstimatorStreams {
  Rng sphere;
  Rng noise_plus;
  Rng noise_minus;

  static EstimatorStreams from_seed(std::uint64_t root);
};

/// Uniform direction on the unit sphere of R^n (normalized Gaussian vector).
void sample_sphere(Rng& rng, Vector& out);
Vector sample_sphere(Index n, Rng& rng);

/// Zeroth-order access to f: each query returns f(x) + xi with fresh noise.
///
/// Not thread safe. The call counter only ever grows.
class ValueOracle {
 public:
  using Objective = std::function<double(const Vector&)>;
  /// Evaluates f(x) plus a noise realization drawn from the given stream.
  using NoisyObjective = std::function<double(const Vector&, Rng&)>;

  /// f(x) + sigma * N(0, 1). With sigma == 0 no noise is drawn.
  static ValueOracle with_gaussian_noise(Objective f, double sigma);

  /// Custom noise model; `sigma` is its (effective) standard deviation.
  ValueOracle(NoisyObjective noisy, Objective noiseless, double sigma);

  double query(const Vector& x, Rng& noise);
  /// Uncounted noiseless evaluation, for diagnostics only.
  double noiseless(const Vector& x) const { return noiseless_(x); }

  std::int64_t calls() const { return calls_; }
  double sigma() const { return sigma_; }

 private:
  NoisyObjective noisy_;
  Objective noiseless_;
  double sigma_;
  std::int64_t calls_ = 0;
};

/// First-order access to the smooth term g.
class GradientOracle {
 public:
  using Value = std::function<double(const Vector&)>;
  using Gradient = std::function<Vector(const Vector&)>;

  GradientOracle(Value value, Gradient gradient, double smoothness);

  Vector gradient(const Vector& x);
  /// Uncounted value of g, for diagnostics only.
  double value(const Vector& x) const { return value_(x); }

  double smoothness() const { return smoothness_; }
  std::int64_t calls() const { return calls_; }

 private:
  Value value_;
  Gradient gradient_;
  double smoothness_;
  std::int64_t calls_ = 0;
};

struct EstimatorConfig {
  double radius;  // smoothing radius r
  Index dimension;

  void validate() const;
};

/// Randomized finite-difference gradient estimators along sphere directions.
/// Holds scratch buffers so repeated calls do not allocate.
class GradientEstimator {
 public:
  explicit GradientEstimator(EstimatorConfig cfg);

  /// (n / 2r) (f(x + re, xi+) - f(x - re, xi-)) e with independent noises.
  const Vector& one_point(ValueOracle& oracle, const Vector& x, EstimatorStreams& streams);
  /// Same, but both probes share one noise realization.
  const Vector& two_point(ValueOracle& oracle, const Vector& x, EstimatorStreams& streams);

  /// Fixed-direction variants; `e` must be a unit vector.
  const Vector& one_point_along(ValueOracle& oracle, const Vector& x, const Vector& e,
                                EstimatorStreams& streams);
  const Vector& two_point_along(ValueOracle& oracle, const Vector& x, const Vector& e,
                                EstimatorStreams& streams);

  const EstimatorConfig& config() const { return cfg_; }
  /// Direction used by the last estimate.
  const Vector& direction() const { return direction_; }

 private:
  void probe_points(const Vector& x, const Vector& e);
  const Vector& finish(double diff, const Vector& e);

  EstimatorConfig cfg_;
  Vector direction_;
  Vector plus_;
  Vector minus_;
  Vector result_;
};

Vector one_point_estimate(ValueOracle& oracle, const EstimatorConfig& cfg, const Vector& x,
                          EstimatorStreams& streams);
Vector two_point_estimate(ValueOracle& oracle, const EstimatorConfig& cfg, const Vector& x,
                          EstimatorStreams& streams);

struct MonteCarloMean {
  double mean;
  double std_error;
};

/// Monte-Carlo estimate of the smoothed value F(x) = E f(x + re). Diagnostic.
MonteCarloMean smoothed_value_mc(const ValueOracle::Objective& f, const EstimatorConfig& cfg,
                                 const Vector& x, std::int64_t samples, Rng& rng);

}  // namespace opzosa

#pragma once

#include "opzosa/sliding.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace opzosa {

enum class MdVariant {
  first_order,   // direction grad f + grad g, needs CompositeProblem::subgradient
  zeroth_order,  // direction one-point estimate + grad g
};

struct MdConfig {
  double step;  // constant step size eta
  int steps;
  MdVariant variant;
  double r = 1e-2;  // smoothing radius of the zeroth-order variant
  std::uint64_t seed = 0;
  bool record_timing = false;
  std::optional<Vector> x0;
};

/// x_{k+1} = argmin_u <d_k, u> + V(x_k, u) / eta. One grad g call per step,
/// plus two value-oracle calls per step for the zeroth-order variant.
/// The probe is evaluated at the current iterate.
RunTrace run_md(CompositeProblem& problem, const MdConfig& cfg, const GapProbe& probe = {});

struct StepTuning {
  double step;
  bool at_endpoint;  // winner is the smallest or largest value of a grid with >= 2 entries
  std::vector<double> grid;    // ascending
  std::vector<double> scores;  // mean final gap per entry of `grid`
};

/// Picks the grid value with the smallest mean final gap over the given seeds.
/// Diverged runs score +inf; ties go to the smaller step.
StepTuning tune_step_size(const std::function<CompositeProblem()>& make_problem,
                          const GapProbe& probe, const std::vector<double>& grid,
                          const MdConfig& base, const std::vector<std::uint64_t>& seeds);

/// Logarithmic 1-2-5 grid from 1e-4 to 1e1.
std::vector<double> default_step_grid();

}  // namespace opzosa

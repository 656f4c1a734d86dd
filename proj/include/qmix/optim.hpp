#pragma once

// Derivative-free minimisers: Nelder-Mead simplex, simulated annealing, and a
// two-fold multi-start driver that runs both and reports how well they agree.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qmix {

struct ObjectiveSpec {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> evaluate;
  /// Optional per-coordinate box; points are clamped into it.
  std::vector<std::optional<std::pair<double, double>>> bounds;
  /// Periodic coordinates wrap into [0, 2 pi).
  std::vector<bool> periodic;

  /// Every coordinate periodic (angle spaces).
  static ObjectiveSpec angles(std::size_t dimension, std::function<double(std::span<const double>)> f);
};

struct AnnealSchedule {
  double initial_temperature = 1.0;
  double cooling = 0.95;
  int epochs = 200;
  int steps_per_epoch = 50;
  /// Proposal standard deviation at the initial temperature; shrinks as sqrt(T / T0).
  double step = 1.0;
  /// Independent chains run by twofold_search; the best polished chain is reported.
  int chains = 1;
};

struct OptimOptions {
  int restarts = 16;
  int max_evals = 20000;
  /// Nelder-Mead stops when the simplex diameter drops below this.
  double tolerance = 1e-9;
  /// Edge length of the initial Nelder-Mead simplex.
  double initial_step = 0.5;
  std::uint64_t seed = 0;
  AnnealSchedule anneal;

  /// Throws Error(BadSettings) unless all counts and scales are positive and cooling is in (0, 1).
  void validate() const;
};

struct OptimResult {
  std::vector<double> point;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;  // false: budget exhausted, best-so-far returned
  /// Best-so-far value after each iteration (NM) or epoch (SA).
  std::vector<double> history;
};

/// Nelder-Mead with coefficients (1, 2, 0.5, 0.5).
OptimResult nelder_mead(const ObjectiveSpec& spec, std::span<const double> start, const OptimOptions& opts);

/// Metropolis annealing with Gaussian proposals and geometric cooling; deterministic in opts.seed.
OptimResult simulated_annealing(const ObjectiveSpec& spec, std::span<const double> start, const OptimOptions& opts);

struct TwofoldResult {
  std::vector<double> point;
  double value = 0.0;
  /// |best Nelder-Mead value - annealing value|.
  double agreement = 0.0;
  double simplex_value = 0.0;
  double anneal_value = 0.0;
  int evaluations = 0;
};

/// Multi-start Nelder-Mead from `starts` (or opts.restarts low-discrepancy points when empty)
/// plus opts.anneal.chains annealing runs from seeded random points, each finished by a
/// Nelder-Mead polish.
/// Ties between restarts go to the lowest index.
TwofoldResult twofold_search(const ObjectiveSpec& spec, const OptimOptions& opts,
                             std::span<const std::vector<double>> starts = {});

/// Halton points scaled to the objective's domain (periodic: [0, 2 pi), bounded: the box, else [-1, 1]).
std::vector<std::vector<double>> halton_starts(const ObjectiveSpec& spec, int count);

}  // namespace qmix

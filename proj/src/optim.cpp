#include "qmix/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "qmix/error.hpp"
#include "qmix/rng.hpp"

namespace qmix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Internal coordinates stay unwrapped so the simplex keeps its shape; only bounded
// coordinates are clamped. Periodic wrapping happens at evaluation and on output.
void clamp_bounds(const ObjectiveSpec& spec, std::vector<double>& x) {
  for (std::size_t i = 0; i < spec.bounds.size() && i < x.size(); ++i)
    if (spec.bounds[i]) x[i] = std::clamp(x[i], spec.bounds[i]->first, spec.bounds[i]->second);
}

void wrap_periodic(const ObjectiveSpec& spec, std::vector<double>& x) {
  for (std::size_t i = 0; i < spec.periodic.size() && i < x.size(); ++i)
    if (spec.periodic[i]) {
      x[i] = std::fmod(x[i], kTwoPi);
      if (x[i] < 0.0) x[i] += kTwoPi;
      if (x[i] >= kTwoPi) x[i] = 0.0;
    }
}

class CountedObjective {
 public:
  explicit CountedObjective(const ObjectiveSpec& spec) : spec_(spec), scratch_(spec.dimension) {}

  double operator()(const std::vector<double>& x) {
    ++count_;
    scratch_ = x;
    wrap_periodic(spec_, scratch_);
    return spec_.evaluate(scratch_);
  }

  int count() const { return count_; }

 private:
  const ObjectiveSpec& spec_;
  std::vector<double> scratch_;
  int count_ = 0;
};

void check_start(const ObjectiveSpec& spec, std::span<const double> start) {
  if (start.size() != spec.dimension) throw Error(ErrorKind::BadSettings, "start point has the wrong dimension");
}

const std::vector<int>& primes() {
  static const std::vector<int> list = [] {
    std::vector<int> p;
    for (int k = 2; p.size() < 128; ++k) {
      bool prime = true;
      for (int q : p) {
        if (q * q > k) break;
        if (k % q == 0) { prime = false; break; }
      }
      if (prime) p.push_back(k);
    }
    return p;
  }();
  return list;
}

double radical_inverse(int index, int base) {
  double result = 0.0, f = 1.0 / base;
  for (int i = index; i > 0; i /= base, f /= base) result += f * (i % base);
  return result;
}

std::pair<double, double> domain(const ObjectiveSpec& spec, std::size_t i) {
  if (i < spec.periodic.size() && spec.periodic[i]) return {0.0, kTwoPi};
  if (i < spec.bounds.size() && spec.bounds[i]) return *spec.bounds[i];
  return {-1.0, 1.0};
}

}  // namespace

ObjectiveSpec ObjectiveSpec::angles(std::size_t dimension, std::function<double(std::span<const double>)> f) {
  ObjectiveSpec spec;
  spec.dimension = dimension;
  spec.evaluate = std::move(f);
  spec.bounds.assign(dimension, std::nullopt);
  spec.periodic.assign(dimension, true);
  return spec;
}

void OptimOptions::validate() const {
  const bool ok = restarts > 0 && max_evals > 0 && tolerance > 0.0 && initial_step > 0.0 &&
                  anneal.initial_temperature > 0.0 && anneal.cooling > 0.0 && anneal.cooling < 1.0 &&
                  anneal.epochs > 0 && anneal.steps_per_epoch > 0 && anneal.step > 0.0 && anneal.chains > 0;
  if (!ok) throw Error(ErrorKind::BadSettings, "optimizer options must be positive with cooling in (0, 1)");
}

OptimResult nelder_mead(const ObjectiveSpec& spec, std::span<const double> start, const OptimOptions& opts) {
  opts.validate();
  check_start(spec, start);
  const std::size_t n = spec.dimension;
  CountedObjective f(spec);

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    clamp_bounds(spec, simplex[i]);
    values[i] = f(simplex[i]);
  }

  OptimResult result;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](std::vector<double>& out, const std::vector<double>& from, double coeff) {
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coeff * (from[k] - centroid[k]);
    clamp_bounds(spec, out);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    result.history.push_back(values[best]);

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) d2 += (simplex[i][k] - simplex[best][k]) * (simplex[i][k] - simplex[best][k]);
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter < opts.tolerance) {
      result.converged = true;
      break;
    }
    if (f.count() >= opts.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

    along(trial, simplex[worst], -1.0);  // reflection
    const double fr = f(trial);
    if (fr < values[best]) {
      along(trial2, simplex[worst], -2.0);  // expansion
      const double fe = f(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    if (fr < values[worst]) {
      along(trial2, simplex[worst], -0.5);  // outside contraction
      const double fc = f(trial2);
      if (fc <= fr) {
        simplex[worst] = trial2;
        values[worst] = fc;
        continue;
      }
    } else {
      along(trial2, simplex[worst], 0.5);  // inside contraction
      const double fc = f(trial2);
      if (fc < values[worst]) {
        simplex[worst] = trial2;
        values[worst] = fc;
        continue;
      }
    }
    for (std::size_t i = 0; i <= n; ++i) {  // shrink towards the best vertex
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      clamp_bounds(spec, simplex[i]);
      values[i] = f(simplex[i]);
    }
  }

  const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.point = simplex[best];
  wrap_periodic(spec, result.point);
  result.value = values[best];
  result.evaluations = f.count();
  return result;
}

OptimResult simulated_annealing(const ObjectiveSpec& spec, std::span<const double> start, const OptimOptions& opts) {
  check_start(spec, start);
  opts.validate();
  const std::size_t n = spec.dimension;
  CountedObjective f(spec);
  RandomStream rng(derive_seed(opts.seed, 0x5a));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<double> x(start.begin(), start.end());
  clamp_bounds(spec, x);
  double fx = f(x);
  std::vector<double> best = x, y(n);
  double fbest = fx;

  OptimResult result;
  const auto& sched = opts.anneal;
  double temperature = sched.initial_temperature;
  for (int epoch = 0; epoch < sched.epochs; ++epoch) {
    const double sigma = sched.step * std::sqrt(temperature / sched.initial_temperature);
    for (int step = 0; step < sched.steps_per_epoch; ++step) {
      // One coordinate per proposal: joint moves mix poorly in a dozen or more dimensions.
      y = x;
      const std::size_t k = pick(rng);
      y[k] += sigma * gauss(rng);
      clamp_bounds(spec, y);
      const double fy = f(y);
      const double u = unit(rng);
      if (fy <= fx || u < std::exp(-(fy - fx) / temperature)) {
        x.swap(y);
        fx = fy;
        if (fx < fbest) {
          fbest = fx;
          best = x;
        }
      }
    }
    result.history.push_back(fbest);
    temperature *= sched.cooling;
  }

  wrap_periodic(spec, best);
  result.point = best;
  result.value = fbest;
  result.evaluations = f.count();
  result.converged = true;
  return result;
}

std::vector<std::vector<double>> halton_starts(const ObjectiveSpec& spec, int count) {
  const auto& p = primes();
  std::vector<std::vector<double>> starts(static_cast<std::size_t>(count), std::vector<double>(spec.dimension));
  for (int i = 0; i < count; ++i)
    for (std::size_t k = 0; k < spec.dimension; ++k) {
      const auto [lo, hi] = domain(spec, k);
      starts[static_cast<std::size_t>(i)][k] = lo + (hi - lo) * radical_inverse(i + 1, p[k % p.size()]);
    }
  return starts;
}

TwofoldResult twofold_search(const ObjectiveSpec& spec, const OptimOptions& opts,
                             std::span<const std::vector<double>> starts) {
  opts.validate();
  std::vector<std::vector<double>> generated;
  if (starts.empty()) {
    generated = halton_starts(spec, opts.restarts);
    // Seeded Cranley-Patterson shift so different seeds probe different points.
    RandomStream shift_rng(derive_seed(opts.seed, 0x4a));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < spec.dimension; ++k) {
      const auto [lo, hi] = domain(spec, k);
      const double shift = unit(shift_rng) * (hi - lo);
      for (auto& s : generated) s[k] = lo + std::fmod(s[k] - lo + shift, hi - lo);
    }
    starts = generated;
  }

  TwofoldResult out;
  OptimResult best_nm;
  bool have = false;
  for (const auto& s : starts) {
    OptimResult r = nelder_mead(spec, s, opts);
    out.evaluations += r.evaluations;
    if (!have || r.value < best_nm.value) {
      best_nm = std::move(r);
      have = true;
    }
  }
  // Restarting the simplex at its own optimum removes premature collapse.
  for (int polish = 0; polish < 3; ++polish) {
    OptimResult r = nelder_mead(spec, best_nm.point, opts);
    out.evaluations += r.evaluations;
    const bool improved = r.value < best_nm.value - opts.tolerance;
    if (r.value < best_nm.value) best_nm = std::move(r);
    if (!improved) break;
  }

  OptimResult sa;
  for (int chain = 0; chain < opts.anneal.chains; ++chain) {
    RandomStream start_rng(derive_seed(opts.seed, 0x3c + 0x100 * static_cast<std::uint64_t>(chain)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> sa_start(spec.dimension);
    for (std::size_t k = 0; k < spec.dimension; ++k) {
      const auto [lo, hi] = domain(spec, k);
      sa_start[k] = lo + (hi - lo) * unit(start_rng);
    }
    OptimOptions chain_opts = opts;
    chain_opts.seed = chain == 0 ? opts.seed : derive_seed(opts.seed, 0x1000 + static_cast<std::uint64_t>(chain));
    OptimResult run = simulated_annealing(spec, sa_start, chain_opts);
    out.evaluations += run.evaluations;
    for (int polish = 0; polish < 2; ++polish) {
      OptimResult r = nelder_mead(spec, run.point, opts);
      out.evaluations += r.evaluations;
      if (r.value < run.value) run = std::move(r);
    }
    if (chain == 0 || run.value < sa.value) sa = std::move(run);
  }

  out.simplex_value = best_nm.value;
  out.anneal_value = sa.value;
  out.agreement = std::abs(best_nm.value - sa.value);
  if (sa.value < best_nm.value) {
    out.point = sa.point;
    out.value = sa.value;
  } else {
    out.point = best_nm.point;
    out.value = best_nm.value;
  }
  return out;
}

}  // namespace qmix

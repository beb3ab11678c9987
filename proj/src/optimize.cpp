#include "peqrng/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "peqrng/error.hpp"

namespace peqrng::optimize {

void MultiStartOptions::validate() const {
  if (min_starts < 1 || max_starts < min_starts) throw InputError("optimizer: need 1 <= min_starts <= max_starts");
  if (!(initial_step > 0.0) || !(final_step > 0.0) || final_step > initial_step)
    throw InputError("optimizer: need 0 < final_step <= initial_step");
  if (max_evaluations_per_start < 1) throw InputError("optimizer: evaluation budget must be positive");
  if (verification_probes < 0) throw InputError("optimizer: negative probe count");
  if (!(convergence_tol > 0.0)) throw InputError("optimizer: convergence tolerance must be positive");
}

namespace {

double place(double v, const Bound& b) {
  if (b.periodic) {
    const double w = b.hi - b.lo;
    double r = std::fmod(v - b.lo, w);
    if (r < 0.0) r += w;
    return b.lo + r;
  }
  return std::clamp(v, b.lo, b.hi);
}

std::vector<double> random_point(std::span<const Bound> bounds, std::mt19937_64& rng) {
  std::vector<double> x(bounds.size());
  for (std::size_t d = 0; d < bounds.size(); ++d) x[d] = bounds[d].lo + (bounds[d].hi - bounds[d].lo) * unit_uniform(rng);
  return x;
}

struct StartResult {
  double value = -INFINITY;
  std::vector<double> x;
  std::uint64_t evaluations = 0;
};

StartResult run_start(const Objective& f, std::span<const Bound> bounds, const MultiStartOptions& opt, int k) {
  std::mt19937_64 rng(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
  StartResult r;
  r.x = random_point(bounds, rng);
  r.value = local_ascent(f, bounds, r.x, opt.initial_step, opt.final_step, opt.max_evaluations_per_start, r.evaluations);
  return r;
}

void run_starts(const Objective& f, std::span<const Bound> bounds, const MultiStartOptions& opt, int from, int to,
                std::vector<StartResult>& out, Exec exec) {
  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = from; k < to; ++k) {
      try {
        out[static_cast<std::size_t>(k)] = run_start(f, bounds, opt, k);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (int k = from; k < to; ++k) out[static_cast<std::size_t>(k)] = run_start(f, bounds, opt, k);
  }
}

}  // namespace

double local_ascent(const Objective& f, std::span<const Bound> bounds, std::vector<double>& x, double initial_step,
                    double final_step, int max_evaluations, std::uint64_t& evaluations) {
  double best = f(x);
  ++evaluations;
  int used = 1;
  std::vector<double> trial = x;
  for (double step = initial_step; step >= final_step && used < max_evaluations; step *= 0.5) {
    bool improved = true;
    while (improved && used < max_evaluations) {
      improved = false;
      for (std::size_t d = 0; d < x.size() && used < max_evaluations; ++d) {
        for (double dir : {1.0, -1.0}) {
          trial[d] = place(x[d] + dir * step, bounds[d]);
          const double v = f(trial);
          ++evaluations;
          ++used;
          if (v > best) {
            best = v;
            x[d] = trial[d];
            improved = true;
            break;
          }
          trial[d] = x[d];
        }
      }
    }
  }
  return best;
}

OptimizeResult maximize(const Objective& f, std::span<const Bound> bounds, const MultiStartOptions& opt, Exec exec) {
  opt.validate();
  if (bounds.empty()) throw InputError("optimizer: no dimensions");
  for (const auto& b : bounds)
    if (!(b.hi > b.lo)) throw InputError("optimizer: empty bound interval");

  std::vector<StartResult> starts(static_cast<std::size_t>(opt.max_starts));
  OptimizeResult res;
  int done = 0;
  int target = opt.min_starts;
  double previous = -INFINITY;
  std::size_t best_index = 0;
  for (;;) {
    run_starts(f, bounds, opt, done, target, starts, exec);
    // Index-ordered reduction; the first of equal values wins.
    for (int k = done; k < target; ++k) {
      const auto& s = starts[static_cast<std::size_t>(k)];
      res.evaluations += s.evaluations;
      if (s.value > starts[best_index].value) best_index = static_cast<std::size_t>(k);
    }
    done = target;
    const double current = starts[best_index].value;
    if (done > opt.min_starts && current - previous < opt.convergence_tol) {
      res.converged = true;
      break;
    }
    if (done >= opt.max_starts) break;
    previous = current;
    target = std::min(2 * done, opt.max_starts);
  }
  res.starts = done;
  res.value = starts[best_index].value;
  res.argmax = starts[best_index].x;

  std::mt19937_64 rng(derive_seed(opt.seed, ~0ULL));
  res.probe_best = -INFINITY;
  for (long p = 0; p < opt.verification_probes; ++p) {
    const auto x = random_point(bounds, rng);
    const double v = f(x);
    ++res.evaluations;
    if (v > res.probe_best) res.probe_best = v;
    if (v > res.value) {
      res.value = v;
      res.argmax = x;
    }
  }
  return res;
}

}  // namespace peqrng::optimize

#pragma once

// Multi-start derivative-free maximization with deterministic per-start seeds.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "peqrng/exec.hpp"

namespace peqrng::optimize {

struct Bound {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;  // wrap instead of clamp
};

struct MultiStartOptions {
  std::uint64_t seed = 0x5EEDULL;
  int min_starts = 64;
  int max_starts = 1024;
  double initial_step = 0.2;
  double final_step = 1e-4;
  int max_evaluations_per_start = 200000;
  long verification_probes = 100000;
  double convergence_tol = 1e-3;

  void validate() const;
};

struct OptimizeResult {
  double value = 0.0;
  std::vector<double> argmax;
  int starts = 0;
  std::uint64_t evaluations = 0;
  bool converged = false;
  double probe_best = 0.0;  // best value seen by the random verification pass
};

using Objective = std::function<double(std::span<const double>)>;

// Coordinate pattern search from one point, halving the step until final_step.
// Returns the local maximum; `evaluations` is incremented per objective call.
double local_ascent(const Objective& f, std::span<const Bound> bounds, std::vector<double>& x, double initial_step,
                    double final_step, int max_evaluations, std::uint64_t& evaluations);

// Starts from uniformly random points; doubles the start count from
// min_starts until the best value changes by less than convergence_tol or
// max_starts is reached, then probes uniformly random points. The objective
// must be safe to call concurrently when exec is parallel.
OptimizeResult maximize(const Objective& f, std::span<const Bound> bounds, const MultiStartOptions& opt,
                        Exec exec = Exec::parallel);

}  // namespace peqrng::optimize

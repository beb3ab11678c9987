#pragma once

// Phase-power calibration of an MZI from output intensity sweeps.

#include <span>
#include <utility>

namespace peqrng::app {

struct CalibrationFit {
  int port = 1;  // 1: a cos^2(bW + d) + c, 2: a sin^2(bW + d) + c
  double a = 0.0;
  double b = 0.0;  // rad per power unit, > 0
  double c = 0.0;
  double d = 0.0;  // rad, in [0, pi)
  double a_err = 0.0;
  double b_err = 0.0;
  double c_err = 0.0;
  double d_err = 0.0;
  double rms = 0.0;
  int samples = 0;
  int iterations = 0;

  double intensity(double w) const;
  double phase(double w) const { return b * w + d; }
};

// Needs >= 8 samples spanning at least half a fringe. Throws InputError on
// bad arguments and FitError on constant data or a failed fit.
CalibrationFit fit_mzi_calibration(std::span<const std::pair<double, double>> samples, int port);

}  // namespace peqrng::app

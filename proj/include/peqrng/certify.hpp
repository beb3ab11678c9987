#pragma once

// Certification: nearest factorized phase operators, Hilbert-Schmidt error
// bounds, correction terms e_chi and e_p, guessing probability and min-entropy.

#include <array>
#include <span>

#include "peqrng/chip.hpp"
#include "peqrng/optimize.hpp"
#include "peqrng/qcore.hpp"

namespace peqrng::certify {

using chip::MziMmis;
using chip::PhaseErrors;

struct PhaseErrorSet {
  PhaseErrors dphi{};
  PhaseErrors dtheta{};

  static PhaseErrorSet table1_chi_plus();
  static PhaseErrorSet table1_chi_minus();

  double max_abs() const noexcept;
  PhaseErrorSet scaled(double s) const noexcept;
  void validate(double epsilon_max = components::kDefaultEpsilonMax) const;

  friend bool operator==(const PhaseErrorSet&, const PhaseErrorSet&) = default;
};

// exp(i varphi) exp(i vartheta n.sigma) closest (Hilbert-Schmidt) to the
// two-branch phase operator diag(e^{2i d1}, e^{2i d2}) (+) diag(e^{2i d3}, e^{2i d4}).
struct FactorizedApprox {
  double varphi = 0.0;
  double vartheta = 0.0;
  qcore::Axis n{0.0, 0.0, 1.0};
  double distance = 0.0;
};

FactorizedApprox nearest_factorized(const PhaseErrors& d);

// 4 eps for one stage, 8 sqrt(2) eps for both stages. stages must be 1 or 2.
double hs_error_bound(double epsilon, int stages);

// Both stages with per-branch offsets replaced by their branch averages; this
// is the factorized operator nearest to rotation_real at the same angles.
qcore::Matrix4 rotation_reference(const chip::RotationSetting& r, const MziMmis& mmis);

// Unit 4-vector from 6 angles: a1..a3 in [0, pi/2], b1..b3 in [0, 2 pi).
qcore::Vector4 hyperspherical_state(std::span<const double, 6> params);

// Max over angles in [0, pi)^4 and pure states of |chi_reference - chi_real|.
// The objective is affine in the density matrix, so pure states suffice.
optimize::OptimizeResult e_chi(const PhaseErrorSet& errors, const MziMmis& mmis,
                               const optimize::MultiStartOptions& opt = {}, Exec exec = Exec::parallel);

// Max over outcomes, angles in [0, pi)^2 and pure states of |P_reference - P_real|.
optimize::OptimizeResult e_p(const PhaseErrorSet& errors, const MziMmis& mmis,
                             const optimize::MultiStartOptions& opt = {}, Exec exec = Exec::parallel);

// The objectives themselves, exposed for oracles and benchmarks.
double e_chi_objective(const PhaseErrorSet& errors, const MziMmis& mmis, std::span<const double> x);
double e_p_objective(const PhaseErrorSet& errors, const MziMmis& mmis, std::span<const double> x);

// 1/2 + 1/2 sqrt(2 - x^2/4)
double f_bound(double x);

// x = max(|chi| - e_chi, 0); 1 when x <= 2, else min(1, f_bound(x) + e_p).
double guessing_probability(double chi_real, double e_chi, double e_p);

struct MinEntropy {
  double bits = 0.0;
  double percent = 0.0;  // bits per event against one bit
};

MinEntropy min_entropy(double p_guess);

double certified_rate(double event_rate_hz, double h_min_bits);

struct ConcavityReport {
  bool passed = true;
  double worst_margin = 0.0;  // min of f(mix) - mix of f
  std::size_t pairs = 0;
  std::size_t checks = 0;
};

// Checks f(l x + (1-l) y) >= l f(x) + (1-l) f(y) on consecutive sample pairs
// and lambda in {0, 1/(steps-1), ..., 1}. Samples must lie in [2, 2 sqrt 2].
ConcavityReport concavity_check(std::span<const double> samples, int lambda_steps = 11, double tolerance = 1e-12);

struct CertificationResult {
  double chi_real = 0.0;
  double e_chi = 0.0;
  double e_p = 0.0;
  double p_guess = 1.0;
  double h_min_bits = 0.0;
  double h_min_percent = 0.0;
  bool certified = false;  // |chi| - e_chi > 2
};

CertificationResult certify(double chi_real, double e_chi, double e_p);

}  // namespace peqrng::certify

#include "peqrng/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "peqrng/error.hpp"

namespace peqrng::certify {

using qcore::cplx;
using qcore::Matrix4;
using qcore::Vector4;

PhaseErrorSet PhaseErrorSet::table1_chi_plus() {
  return {{0.000, 0.011, -0.004, -0.006}, {0.068, 0.216, 0.036, 0.215}};
}

PhaseErrorSet PhaseErrorSet::table1_chi_minus() {
  return {{0.002, 0.004, 0.007, -0.006}, {0.068, 0.187, 0.036, 0.180}};
}

double PhaseErrorSet::max_abs() const noexcept {
  double m = 0.0;
  for (double d : dphi) m = std::max(m, std::abs(d));
  for (double d : dtheta) m = std::max(m, std::abs(d));
  return m;
}

PhaseErrorSet PhaseErrorSet::scaled(double s) const noexcept {
  PhaseErrorSet out = *this;
  for (auto& d : out.dphi) d *= s;
  for (auto& d : out.dtheta) d *= s;
  return out;
}

void PhaseErrorSet::validate(double epsilon_max) const {
  for (const auto* arr : {&dphi, &dtheta})
    for (double d : *arr) {
      if (!std::isfinite(d)) throw InputError("phase error must be finite");
      if (std::abs(d) > epsilon_max) throw RangeError("phase error exceeds epsilon_max");
    }
}

FactorizedApprox nearest_factorized(const PhaseErrors& d) {
  for (double x : d)
    if (!std::isfinite(x)) throw InputError("nearest_factorized: offsets must be finite");
  FactorizedApprox f;
  f.varphi = (d[0] + d[1] + d[2] + d[3]) / 2.0;
  f.vartheta = (d[0] + d[2] - d[1] - d[3]) / 2.0;
  const double a = (d[0] - d[2]) / 2.0;
  const double b = (d[1] - d[3]) / 2.0;
  f.distance = std::sqrt(std::max(0.0, 8.0 - 8.0 * std::cos(a + b) * std::cos(a - b)));
  return f;
}

double hs_error_bound(double epsilon, int stages) {
  if (!(epsilon >= 0.0)) throw InputError("hs_error_bound: epsilon must be >= 0");
  if (stages == 1) return 4.0 * epsilon;
  if (stages == 2) return 8.0 * std::numbers::sqrt2 * epsilon;
  throw InputError("hs_error_bound: stages must be 1 or 2");
}

namespace {

PhaseErrors branch_average(const PhaseErrors& d) {
  const double a = (d[0] + d[2]) / 2.0;
  const double b = (d[1] + d[3]) / 2.0;
  return {a, b, a, b};
}

// Normalized detection probabilities of U psi.
std::array<double, 4> probabilities(const Matrix4& u, const Vector4& psi) {
  const Vector4 out = u * psi;
  std::array<double, 4> p{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) total += (p[k] = std::norm(out[k]));
  for (auto& x : p) x /= total;
  return p;
}

double correlation(const std::array<double, 4>& p) { return p[0] + p[3] - p[1] - p[2]; }

}  // namespace

Matrix4 rotation_reference(const chip::RotationSetting& r, const MziMmis& mmis) {
  return chip::theta_stage(r.theta1, r.theta2, branch_average(r.dtheta), mmis.theta_f, mmis.theta_f) *
         chip::phi_stage(r.phi1, r.phi2, branch_average(r.dphi), mmis.phi_u, mmis.phi_u);
}

Vector4 hyperspherical_state(std::span<const double, 6> x) {
  const double s1 = std::sin(x[0]);
  const double s2 = std::sin(x[1]);
  return {std::cos(x[0]), std::polar(s1 * std::cos(x[1]), x[3]), std::polar(s1 * s2 * std::cos(x[2]), x[4]),
          std::polar(s1 * s2 * std::sin(x[2]), x[5])};
}

double e_chi_objective(const PhaseErrorSet& errors, const MziMmis& mmis, std::span<const double> x) {
  const Vector4 psi = hyperspherical_state(std::span<const double, 6>(x.subspan(4, 6)));
  // ChshStreams order: (phi,theta), (phi,theta'), (phi',theta), (phi',theta').
  static constexpr std::array<std::array<std::size_t, 2>, 4> pairs{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  std::array<double, 4> diff{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto r = chip::RotationSetting::from_angles(x[pairs[k][0]], x[pairs[k][1]], errors.dphi, errors.dtheta);
    diff[k] = correlation(probabilities(rotation_reference(r, mmis), psi)) -
              correlation(probabilities(chip::rotation_real(r, mmis), psi));
  }
  return std::abs(diff[0] - diff[1] + diff[2] + diff[3]);
}

double e_p_objective(const PhaseErrorSet& errors, const MziMmis& mmis, std::span<const double> x) {
  const Vector4 psi = hyperspherical_state(std::span<const double, 6>(x.subspan(2, 6)));
  const auto r = chip::RotationSetting::from_angles(x[0], x[1], errors.dphi, errors.dtheta);
  const auto pi = probabilities(rotation_reference(r, mmis), psi);
  const auto pr = probabilities(chip::rotation_real(r, mmis), psi);
  double m = 0.0;
  for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(pi[k] - pr[k]));
  return m;
}

namespace {

std::vector<optimize::Bound> search_bounds(int angles) {
  constexpr double pi = std::numbers::pi;
  std::vector<optimize::Bound> b(static_cast<std::size_t>(angles), optimize::Bound{0.0, pi, true});
  for (int k = 0; k < 3; ++k) b.push_back({0.0, pi / 2, false});
  for (int k = 0; k < 3; ++k) b.push_back({0.0, 2 * pi, true});
  return b;
}

void check_mmis(const MziMmis& m) {
  for (const auto* p : {&m.phi_u, &m.phi_d, &m.theta_f, &m.theta_n}) {
    p->validate();
    if (p->tabulated()) throw InputError("correction terms need flat (untabulated) MMI coefficients");
  }
}

}  // namespace

optimize::OptimizeResult e_chi(const PhaseErrorSet& errors, const MziMmis& mmis, const optimize::MultiStartOptions& opt,
                               Exec exec) {
  errors.validate(std::numbers::pi);
  check_mmis(mmis);
  const auto bounds = search_bounds(4);
  return optimize::maximize([&](std::span<const double> x) { return e_chi_objective(errors, mmis, x); }, bounds, opt,
                            exec);
}

optimize::OptimizeResult e_p(const PhaseErrorSet& errors, const MziMmis& mmis, const optimize::MultiStartOptions& opt,
                             Exec exec) {
  errors.validate(std::numbers::pi);
  check_mmis(mmis);
  const auto bounds = search_bounds(2);
  return optimize::maximize([&](std::span<const double> x) { return e_p_objective(errors, mmis, x); }, bounds, opt,
                            exec);
}

double f_bound(double x) { return 0.5 + 0.5 * std::sqrt(std::max(0.0, 2.0 - x * x / 4.0)); }

double guessing_probability(double chi_real, double e_chi, double e_p) {
  if (!(e_chi >= 0.0) || !(e_p >= 0.0)) throw InputError("guessing_probability: corrections must be >= 0");
  if (!std::isfinite(chi_real)) throw InputError("guessing_probability: chi must be finite");
  const double x = std::max(std::abs(chi_real) - e_chi, 0.0);
  if (x <= 2.0) return 1.0;
  return std::min(1.0, f_bound(x) + e_p);
}

MinEntropy min_entropy(double p_guess) {
  if (!(p_guess > 0.0 && p_guess <= 1.0)) throw InputError("min_entropy: p_guess must lie in (0, 1]");
  const double bits = p_guess == 1.0 ? 0.0 : -std::log2(p_guess);
  return {bits, 100.0 * bits};
}

double certified_rate(double event_rate_hz, double h_min_bits) {
  if (!(event_rate_hz >= 0.0) || !(h_min_bits >= 0.0)) throw InputError("certified_rate: inputs must be >= 0");
  return event_rate_hz * h_min_bits;
}

ConcavityReport concavity_check(std::span<const double> samples, int lambda_steps, double tolerance) {
  constexpr double lo = 2.0;
  constexpr double hi = 2.0 * std::numbers::sqrt2;
  if (lambda_steps < 2) throw InputError("concavity_check: need at least 2 lambda steps");
  for (double s : samples)
    if (!(s >= lo - 1e-12 && s <= hi + 1e-12)) throw InputError("concavity_check: sample outside [2, 2 sqrt 2]");
  ConcavityReport rep;
  rep.worst_margin = INFINITY;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double x = samples[k];
    const double y = samples[k + 1];
    ++rep.pairs;
    for (int l = 0; l < lambda_steps; ++l) {
      const double lam = static_cast<double>(l) / (lambda_steps - 1);
      const double mix = std::clamp(lam * x + (1.0 - lam) * y, lo, hi);
      const double margin = f_bound(mix) - (lam * f_bound(x) + (1.0 - lam) * f_bound(y));
      rep.worst_margin = std::min(rep.worst_margin, margin);
      ++rep.checks;
    }
  }
  if (rep.checks == 0) rep.worst_margin = 0.0;
  rep.passed = rep.worst_margin >= -tolerance;
  return rep;
}

CertificationResult certify(double chi_real, double e_chi_value, double e_p_value) {
  CertificationResult c;
  c.chi_real = chi_real;
  c.e_chi = e_chi_value;
  c.e_p = e_p_value;
  c.p_guess = guessing_probability(chi_real, e_chi_value, e_p_value);
  const auto h = min_entropy(c.p_guess);
  c.h_min_bits = h.bits;
  c.h_min_percent = h.percent;
  c.certified = std::abs(chi_real) - e_chi_value > 2.0;
  return c;
}

}  // namespace peqrng::certify

#include "peqrng/components.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "peqrng/error.hpp"
#include "peqrng/tolerances.hpp"

namespace peqrng::components {

using qcore::cplx;
using qcore::kI;

namespace {

void check_amplitudes(double t, double r, const char* what) {
  if (!(t >= 0.0 && t <= 1.0) || !(r >= 0.0 && r <= 1.0))
    throw InputError(std::string(what) + ": amplitudes must lie in [0, 1]");
  if (t * t + r * r > 1.0 + 1e-12) throw InputError(std::string(what) + ": t^2 + r^2 must not exceed 1");
}

}  // namespace

MmiParams MmiParams::ideal() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h, {}};
}

MmiParams MmiParams::from_power(double transmission, double reflection) {
  if (!(transmission >= 0.0) || !(reflection >= 0.0)) throw InputError("MMI power coefficients must be >= 0");
  MmiParams p{std::sqrt(transmission), std::sqrt(reflection), {}};
  p.validate();
  return p;
}

MmiParams MmiParams::from_power_table(const std::vector<MmiTablePoint>& power_points) {
  if (power_points.empty()) throw InputError("MMI table must not be empty");
  MmiParams p;
  p.table.reserve(power_points.size());
  for (const auto& pt : power_points) {
    if (!(pt.t >= 0.0) || !(pt.r >= 0.0)) throw InputError("MMI table power coefficients must be >= 0");
    p.table.push_back({pt.wavelength_nm, std::sqrt(pt.t), std::sqrt(pt.r)});
  }
  std::sort(p.table.begin(), p.table.end(),
            [](const MmiTablePoint& a, const MmiTablePoint& b) { return a.wavelength_nm < b.wavelength_nm; });
  // Flat values default to the node nearest the design wavelength.
  const auto nearest = std::min_element(p.table.begin(), p.table.end(), [](const auto& a, const auto& b) {
    return std::abs(a.wavelength_nm - kDesignWavelengthNm) < std::abs(b.wavelength_nm - kDesignWavelengthNm);
  });
  p.t = nearest->t;
  p.r = nearest->r;
  p.validate();
  return p;
}

void MmiParams::validate() const {
  check_amplitudes(t, r, "MMI");
  for (std::size_t k = 0; k < table.size(); ++k) {
    check_amplitudes(table[k].t, table[k].r, "MMI table");
    if (!std::isfinite(table[k].wavelength_nm)) throw InputError("MMI table wavelength must be finite");
    if (k > 0 && !(table[k].wavelength_nm > table[k - 1].wavelength_nm))
      throw InputError("MMI table wavelengths must be strictly increasing");
  }
}

MmiParams::Amplitudes MmiParams::at(std::optional<double> wavelength_nm) const {
  if (!tabulated()) return {t, r};
  if (!wavelength_nm) throw InputError("tabulated MMI requires a wavelength");
  const double wl = *wavelength_nm;
  if (!(wl >= table.front().wavelength_nm && wl <= table.back().wavelength_nm))
    throw RangeError("wavelength " + std::to_string(wl) + " nm outside MMI table range");
  const auto hi = std::lower_bound(table.begin(), table.end(), wl,
                                   [](const MmiTablePoint& p, double w) { return p.wavelength_nm < w; });
  if (hi->wavelength_nm == wl) return {hi->t, hi->r};
  const auto lo = hi - 1;
  const double f = (wl - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
  return {lo->t + f * (hi->t - lo->t), lo->r + f * (hi->r - lo->r)};
}

void PhaseSetting::validate(double epsilon_max) const {
  if (!std::isfinite(zeta1) || !std::isfinite(zeta2) || !std::isfinite(delta1) || !std::isfinite(delta2))
    throw InputError("phase setting must be finite");
  if (std::abs(delta1) > epsilon_max || std::abs(delta2) > epsilon_max)
    throw InputError("phase error offset exceeds epsilon_max");
}

LossModel LossModel::aggregate(double propagation_amplitude, const std::vector<double>& insertion_amplitudes,
                               int crossings, double crossing_transmission) {
  double g = propagation_amplitude;
  for (double a : insertion_amplitudes) g *= a;
  g *= std::pow(std::sqrt(crossing_transmission), crossings);
  LossModel m{g, crossing_transmission};
  m.validate();
  return m;
}

void LossModel::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("loss gamma must lie in (0, 1]");
  if (!(crossing_transmission > 0.0 && crossing_transmission <= 1.0))
    throw InputError("crossing transmission must lie in (0, 1]");
}

WavelengthSpectrum WavelengthSpectrum::monochromatic(double wavelength_nm) { return {{{wavelength_nm, 1.0}}}; }

WavelengthSpectrum WavelengthSpectrum::gaussian(double lo_nm, double hi_nm, int count, double fwhm_nm) {
  if (count < 1 || !(hi_nm >= lo_nm) || !(fwhm_nm > 0.0)) throw InputError("invalid Gaussian spectrum parameters");
  if (count == 1) return monochromatic(0.5 * (lo_nm + hi_nm));
  const double centre = 0.5 * (lo_nm + hi_nm);
  const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  WavelengthSpectrum s;
  s.nodes.reserve(static_cast<std::size_t>(count));
  double total = 0.0;
  for (int k = 0; k < count; ++k) {
    const double wl = lo_nm + (hi_nm - lo_nm) * k / (count - 1);
    const double w = std::exp(-0.5 * std::pow((wl - centre) / sigma, 2));
    s.nodes.push_back({wl, w});
    total += w;
  }
  for (auto& n : s.nodes) n.weight /= total;
  return s;
}

void WavelengthSpectrum::validate() const {
  if (nodes.empty()) throw InputError("spectrum must have at least one node");
  double total = 0.0;
  for (const auto& n : nodes) {
    if (!(n.weight >= 0.0) || !std::isfinite(n.wavelength_nm)) throw InputError("invalid spectrum node");
    total += n.weight;
  }
  if (std::abs(total - 1.0) > tol::kWeightSum) throw InputError("spectrum weights must sum to 1");
}

Matrix2 mmi_matrix(const MmiParams& p, std::optional<double> wavelength_nm) {
  const auto [t, r] = p.at(wavelength_nm);
  return Matrix2({t, kI * r, kI * r, t});
}

Matrix2 phase_shifter_matrix(const PhaseSetting& s) {
  return Matrix2::diagonal({std::polar(1.0, 2.0 * (s.zeta1 + s.delta1)), std::polar(1.0, 2.0 * (s.zeta2 + s.delta2))});
}

Matrix2 mzi_matrix(const MmiParams& mmi, const PhaseSetting& s, std::optional<double> wavelength_nm) {
  const Matrix2 b = mmi_matrix(mmi, wavelength_nm);
  return b * phase_shifter_matrix(s) * b;
}

Matrix4 loss_operator(const LossModel& m) { return Matrix4::identity() * cplx(m.gamma); }

}  // namespace peqrng::components

#pragma once

// Transfer matrices of the integrated-optics elements.

#include <optional>
#include <vector>

#include "peqrng/qcore.hpp"

namespace peqrng::components {

using qcore::Matrix2;
using qcore::Matrix4;

inline constexpr double kDesignWavelengthNm = 730.0;
inline constexpr double kDefaultEpsilonMax = 0.25;
inline constexpr double kDefaultCrossingTransmission = 0.98;

struct MmiTablePoint {
  double wavelength_nm;
  double t;  // amplitude transmission
  double r;  // amplitude reflection

  friend bool operator==(const MmiTablePoint&, const MmiTablePoint&) = default;
};

// Amplitude coefficients of an MMI beam splitter, optionally tabulated
// against wavelength. Amplitudes, not power: t = sqrt(T), r = sqrt(R).
struct MmiParams {
  double t = 0.0;
  double r = 0.0;
  std::vector<MmiTablePoint> table;  // sorted by wavelength when non-empty

  static MmiParams ideal();
  static MmiParams from_power(double transmission, double reflection);
  // Table entries in power units; sorted on construction.
  static MmiParams from_power_table(const std::vector<MmiTablePoint>& power_points);

  bool tabulated() const noexcept { return !table.empty(); }

  // Throws InputError on t, r outside [0, 1] or t^2 + r^2 > 1.
  void validate() const;

  struct Amplitudes {
    double t;
    double r;
  };
  // Flat params ignore the wavelength. Tabulated params require one and
  // interpolate linearly; outside the table a RangeError is thrown.
  Amplitudes at(std::optional<double> wavelength_nm) const;
};

struct PhaseSetting {
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;

  // Throws InputError when |delta| exceeds epsilon_max.
  void validate(double epsilon_max = kDefaultEpsilonMax) const;
};

struct LossModel {
  double gamma = 1.0;  // overall amplitude factor
  double crossing_transmission = kDefaultCrossingTransmission;  // power

  // Folds propagation loss e^{-alpha l} (amplitude), per-component insertion
  // amplitude factors and crossings (power transmission each) into gamma.
  static LossModel aggregate(double propagation_amplitude, const std::vector<double>& insertion_amplitudes,
                             int crossings, double crossing_transmission = kDefaultCrossingTransmission);

  void validate() const;
};

struct SpectrumNode {
  double wavelength_nm;
  double weight;

  friend bool operator==(const SpectrumNode&, const SpectrumNode&) = default;
};

struct WavelengthSpectrum {
  std::vector<SpectrumNode> nodes;

  static WavelengthSpectrum monochromatic(double wavelength_nm = kDesignWavelengthNm);
  // `count` equally spaced nodes over [lo, hi] with Gaussian weights of the
  // given FWHM around the band centre.
  static WavelengthSpectrum gaussian(double lo_nm = 720.0, double hi_nm = 740.0, int count = 21,
                                     double fwhm_nm = 20.0);

  // Throws InputError on empty spectra, negative weights or weights not
  // summing to 1 within tol::kWeightSum.
  void validate() const;
};

Matrix2 mmi_matrix(const MmiParams& p, std::optional<double> wavelength_nm = std::nullopt);

// diag(e^{2i(zeta1+delta1)}, e^{2i(zeta2+delta2)})
Matrix2 phase_shifter_matrix(const PhaseSetting& s);

// U_MMI * U_PS * U_MMI
Matrix2 mzi_matrix(const MmiParams& mmi, const PhaseSetting& s, std::optional<double> wavelength_nm = std::nullopt);

// gamma * I4
Matrix4 loss_operator(const LossModel& m);

}  // namespace peqrng::components

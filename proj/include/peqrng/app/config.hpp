#pragma once

// Chip configuration document (JSON, versioned). Power coefficients are kept
// as written so that documents round-trip; amplitudes are derived on demand.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "peqrng/certify.hpp"
#include "peqrng/chip.hpp"

namespace peqrng::app {

inline constexpr const char* kChipFormat = "peqrng-chip";
inline constexpr int kChipVersion = 1;

struct MmiSpec {
  double T = 0.5;  // power transmission
  double R = 0.5;  // power reflection
  std::vector<components::MmiTablePoint> table;  // (wavelength_nm, T, R) in power units

  components::MmiParams params() const;
  friend bool operator==(const MmiSpec&, const MmiSpec&) = default;
};

struct SpectrumSpec {
  std::string kind = "gaussian";  // monochromatic | gaussian | table
  double center_nm = components::kDesignWavelengthNm;
  double lo_nm = 720.0;
  double hi_nm = 740.0;
  int count = 21;
  double fwhm_nm = 20.0;
  std::vector<components::SpectrumNode> nodes;

  components::WavelengthSpectrum spectrum() const;
  friend bool operator==(const SpectrumSpec&, const SpectrumSpec&) = default;
};

struct RunSpec {
  double rate_hz = 120000.0;
  double duration_s = 1.0;
  double bin_us = 1.0;
  double window_ms = 50.0;
  double subinterval_s = 0.2;
  double eps = 0x1.0p-32;
  std::array<double, 3> phi_range{-2.0, 2.0, 0.1};    // lo, hi, step
  std::array<double, 3> theta_range{-2.0, 0.0, 0.1};  // lo, hi, step

  void validate() const;
  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct ErrorCase {
  certify::PhaseErrorSet errors;
  std::optional<std::array<double, 4>> angles;  // (phi, phi', theta, theta')

  friend bool operator==(const ErrorCase&, const ErrorCase&) = default;
};

struct ChipDocument {
  std::string name = "chip";
  MmiSpec generation_mmi;
  MmiSpec phi_u, phi_d, theta_f, theta_n;
  double xi_rad = chip::GenerationSetting{}.xi;
  double propagation_amplitude = 1.0;
  int crossings = 0;
  double crossing_transmission = components::kDefaultCrossingTransmission;
  SpectrumSpec spectrum;
  bool phase_dispersion = false;
  double design_wavelength_nm = components::kDesignWavelengthNm;
  std::array<double, 2> xi_compensation_rad{0.0, 0.0};
  double epsilon_max_rad = components::kDefaultEpsilonMax;
  // Whether the stored phase errors are applied when simulating streams; they
  // always feed the correction terms.
  bool simulate_with_errors = false;
  ErrorCase chi_plus;
  ErrorCase chi_minus;
  std::uint64_t seed = 1;
  RunSpec run;

  chip::ChipConfig chip_config() const;
  const ErrorCase& error_case(const std::string& which) const;  // "plus" | "minus"
  void validate() const;

  static ChipDocument ideal();
  static ChipDocument characterized();

  friend bool operator==(const ChipDocument&, const ChipDocument&) = default;
};

std::string to_json_text(const ChipDocument& doc);
ChipDocument chip_document_from_json_text(const std::string& text);

ChipDocument load_chip_document(const std::filesystem::path& path);
void save_chip_document(const ChipDocument& doc, const std::filesystem::path& path);

// Resolves a --config argument: as given if it exists, else relative to
// $PEQRNG_CONFIG_DIR. Throws InputError when neither exists.
std::filesystem::path resolve_config_path(const std::string& arg);

}  // namespace peqrng::app

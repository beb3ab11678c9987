#pragma once

// Composition of the full photonic chip: generation stage, relative-position
// (phi) rotation stage, absolute-position (theta) rotation stage, spectral
// averaging and per-channel detection probabilities.

#include <array>
#include <numbers>
#include <optional>

#include "peqrng/components.hpp"
#include "peqrng/exec.hpp"
#include "peqrng/qcore.hpp"

namespace peqrng::chip {

using components::LossModel;
using components::MmiParams;
using components::WavelengthSpectrum;
using qcore::Channel;
using qcore::Matrix2;
using qcore::Matrix4;
using qcore::QuantumState;

// Probabilities over (UF, UN, DF, DN).
struct OutcomeDistribution {
  std::array<double, 4> p{};

  double operator[](Channel c) const noexcept { return p[qcore::index(c)]; }
  double sum() const noexcept { return p[0] + p[1] + p[2] + p[3]; }
  void validate() const;  // entries in [0, 1], sum 1 within tol::kDistribution
};

struct GenerationSetting {
  double xi = -std::numbers::pi / 2;  // relative phase; -pi/2 yields |phi+> for a 50:50 MMI
};

using PhaseErrors = std::array<double, 4>;

// Nominal heater phases of both rotation stages plus one error offset per
// physical phase shifter. dphi = (U-branch zeta1, U-branch zeta2, D-branch
// zeta1, D-branch zeta2); dtheta likewise for the F and N branches.
struct RotationSetting {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  PhaseErrors dphi{};
  PhaseErrors dtheta{};

  // Splits rotation angles symmetrically into heater phases (angle/2, -angle/2).
  static RotationSetting from_angles(double phi, double theta, const PhaseErrors& dphi = {},
                                     const PhaseErrors& dtheta = {});

  double phi() const noexcept { return phi1 - phi2; }
  double theta() const noexcept { return theta1 - theta2; }

  // All phases and offsets multiplied by s (thermo-optic dispersion model).
  RotationSetting scaled(double s) const noexcept;
};

// MMI parameters of the four MZIs, keyed by the branch each one rotates.
struct MziMmis {
  MmiParams phi_u = MmiParams::ideal();    // rotates F/N inside the U branch
  MmiParams phi_d = MmiParams::ideal();    // rotates F/N inside the D branch
  MmiParams theta_f = MmiParams::ideal();  // rotates U/D inside the F branch
  MmiParams theta_n = MmiParams::ideal();  // rotates U/D inside the N branch

  static MziMmis uniform(const MmiParams& p) { return {p, p, p, p}; }
};

struct ChipConfig {
  MmiParams generation_mmi = MmiParams::ideal();
  MziMmis mzi_mmis{};
  GenerationSetting generation{};
  LossModel loss{};
  WavelengthSpectrum spectrum = WavelengthSpectrum::gaussian();
  bool phase_dispersion = false;  // phases scale as design_wavelength / wavelength
  double design_wavelength_nm = components::kDesignWavelengthNm;
  // Extra D-vs-U phase applied to the F and N components between the stages.
  std::array<double, 2> xi_compensation{0.0, 0.0};
  double epsilon_max = components::kDefaultEpsilonMax;

  static ChipConfig ideal();
  // Characterized chip: every MMI at T = 40 %, R = 60 %, crossings 98 %.
  static ChipConfig characterized();

  void validate() const;
};

// (t|UF> + i r e^{i xi}|DN>) / sqrt(t^2 + r^2)
QuantumState generation_state(const GenerationSetting& g, const MmiParams& mmi,
                              std::optional<double> wavelength_nm = std::nullopt);

// Ideal MZI at rotation angle zeta (heater phases zeta/2, -zeta/2):
// i [[sin zeta, cos zeta], [cos zeta, -sin zeta]].
Matrix2 ideal_rotation(double zeta);

// A(theta) (x) B(phi) with ideal MZIs.
Matrix4 rotation_ideal(double phi, double theta);

// P1 (x) MZI_U + P2 (x) MZI_D
Matrix4 phi_stage(double phi1, double phi2, const PhaseErrors& dphi, const MmiParams& mmi_u,
                  const MmiParams& mmi_d, std::optional<double> wavelength_nm = std::nullopt);
// MZI_F (x) P1 + MZI_N (x) P2
Matrix4 theta_stage(double theta1, double theta2, const PhaseErrors& dtheta, const MmiParams& mmi_f,
                    const MmiParams& mmi_n, std::optional<double> wavelength_nm = std::nullopt);

// theta_stage * phi_stage
Matrix4 rotation_real(const RotationSetting& r, const MziMmis& mmis, std::optional<double> wavelength_nm = std::nullopt);

// Tr[U L rho L^dag U^dag P_ab] / Tr[U L rho L^dag U^dag]
OutcomeDistribution detection_probabilities(const QuantumState& state, const Matrix4& u, const LossModel& loss);

// Full chip operator at one wavelength (rotation stages, compensation phase).
Matrix4 chip_operator(const ChipConfig& cfg, const RotationSetting& r, double wavelength_nm);

// Distribution for a single spectral component.
OutcomeDistribution monochromatic_probabilities(const ChipConfig& cfg, const RotationSetting& r, double wavelength_nm);

// Spectrum-weighted average of per-wavelength distributions.
OutcomeDistribution broadband_probabilities(const ChipConfig& cfg, const RotationSetting& r, Exec exec = Exec::parallel);

}  // namespace peqrng::chip

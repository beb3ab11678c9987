#include "peqrng/chip.hpp"

#include <cmath>
#include <exception>
#include <vector>

#include "peqrng/error.hpp"
#include "peqrng/tolerances.hpp"

namespace peqrng::chip {

using components::PhaseSetting;
using qcore::cplx;
using qcore::kI;

void OutcomeDistribution::validate() const {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("distribution entries must lie in [0, 1]");
  if (std::abs(sum() - 1.0) > tol::kDistribution) throw InputError("distribution must sum to 1");
}

RotationSetting RotationSetting::from_angles(double phi, double theta, const PhaseErrors& dphi,
                                             const PhaseErrors& dtheta) {
  return {phi / 2, -phi / 2, theta / 2, -theta / 2, dphi, dtheta};
}

RotationSetting RotationSetting::scaled(double s) const noexcept {
  RotationSetting out = *this;
  out.phi1 *= s;
  out.phi2 *= s;
  out.theta1 *= s;
  out.theta2 *= s;
  for (auto& d : out.dphi) d *= s;
  for (auto& d : out.dtheta) d *= s;
  return out;
}

ChipConfig ChipConfig::ideal() {
  ChipConfig c;
  c.loss.crossing_transmission = 1.0;
  return c;
}

ChipConfig ChipConfig::characterized() {
  ChipConfig c;
  const MmiParams m = MmiParams::from_power(0.4, 0.6);
  c.generation_mmi = m;
  c.mzi_mmis = MziMmis::uniform(m);
  c.loss = LossModel::aggregate(1.0, {}, 2, components::kDefaultCrossingTransmission);
  return c;
}

void ChipConfig::validate() const {
  generation_mmi.validate();
  for (const MmiParams* m : {&mzi_mmis.phi_u, &mzi_mmis.phi_d, &mzi_mmis.theta_f, &mzi_mmis.theta_n}) m->validate();
  if (!std::isfinite(generation.xi)) throw InputError("xi must be finite");
  loss.validate();
  spectrum.validate();
  if (!(design_wavelength_nm > 0.0)) throw InputError("design wavelength must be positive");
  if (!(epsilon_max > 0.0)) throw InputError("epsilon_max must be positive");
}

QuantumState generation_state(const GenerationSetting& g, const MmiParams& mmi, std::optional<double> wavelength_nm) {
  const auto [t, r] = mmi.at(wavelength_nm);
  if (t == 0.0 && r == 0.0) throw DegenerateInputError("generation MMI transmits nothing (t = r = 0)");
  const double norm = std::sqrt(t * t + r * r);
  return QuantumState::pure({t / norm, 0.0, 0.0, kI * std::polar(r / norm, g.xi)});
}

Matrix2 ideal_rotation(double zeta) {
  const double s = std::sin(zeta);
  const double c = std::cos(zeta);
  return Matrix2({kI * s, kI * c, kI * c, -kI * s});
}

Matrix4 rotation_ideal(double phi, double theta) {
  return qcore::tensor_product(ideal_rotation(theta), ideal_rotation(phi));
}

Matrix4 phi_stage(double phi1, double phi2, const PhaseErrors& dphi, const MmiParams& mmi_u, const MmiParams& mmi_d,
                  std::optional<double> wavelength_nm) {
  const Matrix2 u = components::mzi_matrix(mmi_u, PhaseSetting{phi1, phi2, dphi[0], dphi[1]}, wavelength_nm);
  const Matrix2 d = components::mzi_matrix(mmi_d, PhaseSetting{phi1, phi2, dphi[2], dphi[3]}, wavelength_nm);
  return qcore::tensor_product(qcore::projector_first(), u) + qcore::tensor_product(qcore::projector_second(), d);
}

Matrix4 theta_stage(double theta1, double theta2, const PhaseErrors& dtheta, const MmiParams& mmi_f,
                    const MmiParams& mmi_n, std::optional<double> wavelength_nm) {
  const Matrix2 f = components::mzi_matrix(mmi_f, PhaseSetting{theta1, theta2, dtheta[0], dtheta[1]}, wavelength_nm);
  const Matrix2 n = components::mzi_matrix(mmi_n, PhaseSetting{theta1, theta2, dtheta[2], dtheta[3]}, wavelength_nm);
  return qcore::tensor_product(f, qcore::projector_first()) + qcore::tensor_product(n, qcore::projector_second());
}

Matrix4 rotation_real(const RotationSetting& r, const MziMmis& mmis, std::optional<double> wavelength_nm) {
  return theta_stage(r.theta1, r.theta2, r.dtheta, mmis.theta_f, mmis.theta_n, wavelength_nm) *
         phi_stage(r.phi1, r.phi2, r.dphi, mmis.phi_u, mmis.phi_d, wavelength_nm);
}

OutcomeDistribution detection_probabilities(const QuantumState& state, const Matrix4& u, const LossModel& loss) {
  const Matrix4 rho = state.transformed_density(u * components::loss_operator(loss));
  const double total = rho.trace().real();
  if (!(total > 0.0)) throw DegenerateInputError("state annihilated by the chip operator");
  OutcomeDistribution d;
  for (std::size_t k = 0; k < 4; ++k) {
    double p = rho(k, k).real() / total;
    if (p < 0.0 && p > -tol::kProbabilityClip) p = 0.0;
    d.p[k] = p;
  }
  return d;
}

Matrix4 chip_operator(const ChipConfig& cfg, const RotationSetting& r, double wavelength_nm) {
  const RotationSetting rs = cfg.phase_dispersion ? r.scaled(cfg.design_wavelength_nm / wavelength_nm) : r;
  const Matrix4 phi = phi_stage(rs.phi1, rs.phi2, rs.dphi, cfg.mzi_mmis.phi_u, cfg.mzi_mmis.phi_d, wavelength_nm);
  const Matrix4 theta =
      theta_stage(rs.theta1, rs.theta2, rs.dtheta, cfg.mzi_mmis.theta_f, cfg.mzi_mmis.theta_n, wavelength_nm);
  if (cfg.xi_compensation[0] == 0.0 && cfg.xi_compensation[1] == 0.0) return theta * phi;
  const Matrix4 comp = Matrix4::diagonal(
      {1.0, 1.0, std::polar(1.0, cfg.xi_compensation[0]), std::polar(1.0, cfg.xi_compensation[1])});
  return theta * comp * phi;
}

OutcomeDistribution monochromatic_probabilities(const ChipConfig& cfg, const RotationSetting& r,
                                                double wavelength_nm) {
  const QuantumState psi = generation_state(cfg.generation, cfg.generation_mmi, wavelength_nm);
  return detection_probabilities(psi, chip_operator(cfg, r, wavelength_nm), cfg.loss);
}

OutcomeDistribution broadband_probabilities(const ChipConfig& cfg, const RotationSetting& r, Exec exec) {
  if (cfg.spectrum.nodes.empty()) throw InputError("broadband_probabilities: empty spectrum");
  cfg.spectrum.validate();
  const auto& nodes = cfg.spectrum.nodes;
  const long n = static_cast<long>(nodes.size());
  std::vector<OutcomeDistribution> per_node(nodes.size());

  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
      try {
        per_node[static_cast<std::size_t>(k)] =
            monochromatic_probabilities(cfg, r, nodes[static_cast<std::size_t>(k)].wavelength_nm);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long k = 0; k < n; ++k)
      per_node[static_cast<std::size_t>(k)] =
          monochromatic_probabilities(cfg, r, nodes[static_cast<std::size_t>(k)].wavelength_nm);
  }

  // Fixed-order reduction keeps both paths bit-identical.
  OutcomeDistribution out;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (std::size_t c = 0; c < 4; ++c) out.p[c] += nodes[k].weight * per_node[k].p[c];
  return out;
}

}  // namespace peqrng::chip

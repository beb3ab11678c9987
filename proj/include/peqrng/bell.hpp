#pragma once

// Correlation coefficients, the CHSH function and the best-combination search
// over correlation grids.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "peqrng/chip.hpp"
#include "peqrng/events.hpp"
#include "peqrng/exec.hpp"

namespace peqrng::bell {

using chip::OutcomeDistribution;

inline constexpr double kDefaultEta = 1.0 / 3125.0;

// P(UF) + P(DN) - P(UN) - P(DF)
double correlation_coefficient(const OutcomeDistribution& p);

// E(phi,theta) - E(phi,theta') + E(phi',theta) + E(phi',theta')
double chi_from_coefficients(double e00, double e01, double e10, double e11);

// chi_from_coefficients over four distributions in ChshStreams order.
double chi_from_distributions(const std::array<OutcomeDistribution, 4>& d);

// 3 cos(alpha) - cos(3 alpha)
double chi_alpha_ideal(double alpha);

// Closed-form correlation surface of the chip with 40:60 MMIs.
double theoretical_E_nonideal(double phi, double theta, double eta = kDefaultEta);

// E over a (phi, theta) grid; cells may be missing.
struct CorrelationGrid {
  std::vector<double> phi_values;
  std::vector<double> theta_values;
  std::vector<std::optional<double>> E;       // row-major, phi index outer
  std::vector<std::optional<double>> std_errors;  // empty, or same shape as E

  CorrelationGrid() = default;
  CorrelationGrid(std::vector<double> phis, std::vector<double> thetas);

  std::size_t rows() const noexcept { return phi_values.size(); }
  std::size_t cols() const noexcept { return theta_values.size(); }
  std::optional<double>& at(std::size_t i, std::size_t j) { return E[i * cols() + j]; }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return E[i * cols() + j]; }
  void validate() const;
};

// Inclusive arithmetic range lo, lo + step, ..., hi (hi included when it falls
// on the lattice within 1e-9).
std::vector<double> angle_range(double lo, double hi, double step);

// Noiseless chip correlations over a grid, one broadband evaluation per cell.
CorrelationGrid simulate_correlation_grid(const chip::ChipConfig& cfg, std::span<const double> phis,
                                          std::span<const double> thetas, const chip::PhaseErrors& dphi = {},
                                          const chip::PhaseErrors& dtheta = {}, Exec exec = Exec::parallel);

enum class Extremum { max, min };

struct ChiResult {
  double chi = 0.0;
  // (phi, phi', theta, theta'), labeled so the minus sign sits on (phi, theta').
  std::array<double, 4> angles{};
  double std_error = 0.0;
  Extremum sign = Extremum::max;
  // Position of the minus sign before relabeling, in ChshStreams order.
  int minus_term = 1;
};

struct ChiSearch {
  ChiResult max;
  ChiResult min;
  std::uint64_t evaluations = 0;
};

// Exhaustive search over angle pairs and minus-sign positions. Cells without
// data are skipped. Throws InputError on fewer than 2 phi or 2 theta values.
ChiSearch best_combination_search(const CorrelationGrid& grid, Exec exec = Exec::parallel);

// sample stddev / sqrt(N); needs N >= 2.
double standard_error(std::span<const double> samples);

// Standard error of chi over consecutive subintervals of the four streams.
double chi_stderr(const events::ChshStreams& streams, double subinterval_s = 0.2, std::uint64_t tie_seed = 0,
                  events::TieMode mode = events::TieMode::firing_channels);

}  // namespace peqrng::bell

#include "peqrng/bell.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <tuple>

#include "peqrng/error.hpp"

namespace peqrng::bell {

double correlation_coefficient(const OutcomeDistribution& p) {
  using qcore::Channel;
  return p[Channel::UF] + p[Channel::DN] - p[Channel::UN] - p[Channel::DF];
}

double chi_from_coefficients(double e00, double e01, double e10, double e11) { return e00 - e01 + e10 + e11; }

double chi_from_distributions(const std::array<OutcomeDistribution, 4>& d) {
  return chi_from_coefficients(correlation_coefficient(d[0]), correlation_coefficient(d[1]),
                               correlation_coefficient(d[2]), correlation_coefficient(d[3]));
}

double chi_alpha_ideal(double alpha) { return 3.0 * std::cos(alpha) - std::cos(3.0 * alpha); }

double theoretical_E_nonideal(double phi, double theta, double eta) {
  const double s6 = std::sqrt(6.0);
  const double k = 5.0 + 2.0 * s6;
  return eta * (5.0 - 48.0 * s6 - 24.0 * k * std::cos(2.0 * phi) - 24.0 * k * std::cos(2.0 * theta) +
                48.0 * (30.0 - 13.0 * s6) * std::cos(2.0 * (phi + theta)) + 288.0 * k * std::cos(2.0 * (phi - theta)));
}

CorrelationGrid::CorrelationGrid(std::vector<double> phis, std::vector<double> thetas)
    : phi_values(std::move(phis)), theta_values(std::move(thetas)), E(phi_values.size() * theta_values.size()) {}

void CorrelationGrid::validate() const {
  if (E.size() != rows() * cols()) throw InputError("correlation grid: cell count does not match the angle lists");
  if (!std_errors.empty() && std_errors.size() != E.size())
    throw InputError("correlation grid: stderr shape does not match");
  for (double a : phi_values)
    if (!std::isfinite(a)) throw InputError("correlation grid: non-finite phi");
  for (double a : theta_values)
    if (!std::isfinite(a)) throw InputError("correlation grid: non-finite theta");
  for (const auto& e : E)
    if (e && !(std::abs(*e) <= 1.0 + 1e-9)) throw InputError("correlation grid: |E| exceeds 1");
  for (const auto& s : std_errors)
    if (s && !(*s >= 0.0)) throw InputError("correlation grid: negative standard error");
}

std::vector<double> angle_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InputError("angle range: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + static_cast<double>(k) * step;
  return out;
}

CorrelationGrid simulate_correlation_grid(const chip::ChipConfig& cfg, std::span<const double> phis,
                                          std::span<const double> thetas, const chip::PhaseErrors& dphi,
                                          const chip::PhaseErrors& dtheta, Exec exec) {
  cfg.validate();
  CorrelationGrid g({phis.begin(), phis.end()}, {thetas.begin(), thetas.end()});
  const long cells = static_cast<long>(g.E.size());
  auto cell = [&](long c) {
    const auto i = static_cast<std::size_t>(c) / g.cols();
    const auto j = static_cast<std::size_t>(c) % g.cols();
    const auto r = chip::RotationSetting::from_angles(g.phi_values[i], g.theta_values[j], dphi, dtheta);
    g.E[static_cast<std::size_t>(c)] = correlation_coefficient(chip::broadband_probabilities(cfg, r, Exec::serial));
  };
  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long c = 0; c < cells; ++c) {
      try {
        cell(c);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long c = 0; c < cells; ++c) cell(c);
  }
  return g;
}

namespace {

struct Candidate {
  double chi = 0.0;
  std::array<std::size_t, 4> idx{};  // canonical (phi, phi', theta, theta') indices
  int minus_term = 1;
  bool valid = false;
};

// Total order: larger (or smaller) chi first, then the lexicographically
// smallest angle tuple, then the smallest minus-sign position.
bool better(const Candidate& a, const Candidate& b, const CorrelationGrid& g, Extremum ext) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.chi != b.chi) return ext == Extremum::max ? a.chi > b.chi : a.chi < b.chi;
  const auto key = [&](const Candidate& c) {
    return std::make_tuple(g.phi_values[c.idx[0]], g.phi_values[c.idx[1]], g.theta_values[c.idx[2]],
                           g.theta_values[c.idx[3]], c.minus_term);
  };
  return key(a) < key(b);
}

struct Partial {
  Candidate max, min;
  std::uint64_t evaluations = 0;
};

Partial search_rows(const CorrelationGrid& g, std::size_t i) {
  Partial out;
  const std::size_t nr = g.rows();
  const std::size_t nc = g.cols();
  for (std::size_t i2 = i + 1; i2 < nr; ++i2) {
    for (std::size_t j = 0; j < nc; ++j) {
      for (std::size_t j2 = j + 1; j2 < nc; ++j2) {
        const auto& a = g.at(i, j);
        const auto& b = g.at(i, j2);
        const auto& c = g.at(i2, j);
        const auto& d = g.at(i2, j2);
        if (!a || !b || !c || !d) continue;
        // Relabel so the minus sign lands on (phi, theta') for each position s.
        const std::array<std::array<std::size_t, 4>, 4> relabel{{
            {i, i2, j2, j},   // minus on (phi, theta)
            {i, i2, j, j2},   // minus on (phi, theta')
            {i2, i, j2, j},   // minus on (phi', theta)
            {i2, i, j, j2},   // minus on (phi', theta')
        }};
        for (int s = 0; s < 4; ++s) {
          const auto& k = relabel[static_cast<std::size_t>(s)];
          Candidate cand;
          cand.idx = k;
          cand.minus_term = s;
          cand.valid = true;
          cand.chi = chi_from_coefficients(*g.at(k[0], k[2]), *g.at(k[0], k[3]), *g.at(k[1], k[2]), *g.at(k[1], k[3]));
          ++out.evaluations;
          if (better(cand, out.max, g, Extremum::max)) out.max = cand;
          if (better(cand, out.min, g, Extremum::min)) out.min = cand;
        }
      }
    }
  }
  return out;
}

ChiResult to_result(const Candidate& c, const CorrelationGrid& g, Extremum ext) {
  ChiResult r;
  r.chi = c.chi;
  r.angles = {g.phi_values[c.idx[0]], g.phi_values[c.idx[1]], g.theta_values[c.idx[2]], g.theta_values[c.idx[3]]};
  r.sign = ext;
  r.minus_term = c.minus_term;
  if (!g.std_errors.empty()) {
    // Independent cells: errors add in quadrature.
    double var = 0.0;
    bool have = true;
    for (auto [pi, tj] : {std::pair{0, 2}, std::pair{0, 3}, std::pair{1, 2}, std::pair{1, 3}}) {
      const auto& s = g.std_errors[c.idx[static_cast<std::size_t>(pi)] * g.cols() + c.idx[static_cast<std::size_t>(tj)]];
      if (!s) {
        have = false;
        break;
      }
      var += *s * *s;
    }
    if (have) r.std_error = std::sqrt(var);
  }
  return r;
}

}  // namespace

ChiSearch best_combination_search(const CorrelationGrid& grid, Exec exec) {
  grid.validate();
  if (grid.rows() < 2 || grid.cols() < 2)
    throw InputError("best_combination_search: need at least 2 phi and 2 theta values");

  const long rows = static_cast<long>(grid.rows());
  std::vector<Partial> partial(grid.rows());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < rows; ++i) partial[static_cast<std::size_t>(i)] = search_rows(grid, static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < rows; ++i) partial[static_cast<std::size_t>(i)] = search_rows(grid, static_cast<std::size_t>(i));
  }

  Partial best;
  for (const auto& p : partial) {
    if (better(p.max, best.max, grid, Extremum::max)) best.max = p.max;
    if (better(p.min, best.min, grid, Extremum::min)) best.min = p.min;
    best.evaluations += p.evaluations;
  }
  if (!best.max.valid) throw InputError("best_combination_search: no complete angle quadruple in the grid");
  return {to_result(best.max, grid, Extremum::max), to_result(best.min, grid, Extremum::min), best.evaluations};
}

double standard_error(std::span<const double> samples) {
  if (samples.size() < 2) throw InputError("standard_error: need at least 2 samples");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(samples.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

double chi_stderr(const events::ChshStreams& streams, double subinterval_s, std::uint64_t tie_seed,
                  events::TieMode mode) {
  if (!(subinterval_s > 0.0)) throw InputError("chi_stderr: subinterval must be positive");
  const double duration = streams[0].meta.duration_s;
  for (const auto& s : streams) {
    s.validate();
    if (std::abs(s.meta.duration_s - duration) > 1e-12) throw InputError("chi_stderr: streams must share one duration");
  }
  if (duration < 2.0 * subinterval_s - 1e-9) throw InputError("chi_stderr: streams shorter than two subintervals");

  std::array<std::vector<std::optional<OutcomeDistribution>>, 4> per_stream;
  for (std::size_t k = 0; k < 4; ++k)
    per_stream[k] =
        events::window_distributions(events::bin_and_resolve(streams[k], derive_seed(tie_seed, k), mode), duration,
                                     subinterval_s);
  std::vector<double> chis;
  for (std::size_t w = 0; w < per_stream[0].size(); ++w) {
    std::array<OutcomeDistribution, 4> d;
    bool complete = true;
    for (std::size_t k = 0; k < 4 && complete; ++k) {
      complete = per_stream[k][w].has_value();
      if (complete) d[k] = *per_stream[k][w];
    }
    if (complete) chis.push_back(chi_from_distributions(d));
  }
  if (chis.size() < 2) throw InputError("chi_stderr: fewer than two subintervals with data on all streams");
  return standard_error(chis);
}

}  // namespace peqrng::bell

#pragma once

// Independent reference computations used by the tests. None of these call
// the library routine they are used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "peqrng/certify.hpp"
#include "peqrng/chip.hpp"

namespace oracle {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// e^{i (varphi I + vartheta n.sigma)} by the matrix exponential.
inline Eigen::Matrix2cd pauli_exp(double varphi, double vartheta, const std::array<double, 3>& n) {
  const cplx i(0, 1);
  Eigen::Matrix2cd g;
  g << varphi + vartheta * n[2], vartheta * (n[0] - i * n[1]), vartheta * (n[0] + i * n[1]), varphi - vartheta * n[2];
  return (i * g).exp();
}

// HS distance between diag(e^{2i d}) and I (x) e^{i p}(cos t I + i sin t n.sigma),
// n = (sqrt(1 - nz^2), 0, nz), written out entry by entry.
inline double product_distance(const std::array<double, 4>& d, double p, double t, double nz) {
  const double nx = std::sqrt(std::max(0.0, 1.0 - nz * nz));
  const cplx i(0, 1);
  const cplx g = std::exp(i * p);
  const cplx v00 = g * (std::cos(t) + i * std::sin(t) * nz);
  const cplx v11 = g * (std::cos(t) - i * std::sin(t) * nz);
  const cplx v01 = g * i * std::sin(t) * nx;
  double s = 0.0;
  for (int b = 0; b < 2; ++b) {
    s += std::norm(v00 - std::exp(2.0 * i * d[2 * b]));
    s += std::norm(v11 - std::exp(2.0 * i * d[2 * b + 1]));
    s += 2.0 * std::norm(v01);
  }
  return std::sqrt(s);
}

// Dense grid over (p, t, nz), then shrinking pattern search from the best
// point of every nz slice. The slices matter: at sin t = 0 the nz direction is
// flat and a single local search can stall there.
inline double brute_force_nearest_distance(const std::array<double, 4>& d) {
  constexpr int n = 180;
  const std::array<double, 5> slices{-1.0, -0.5, 0.0, 0.5, 1.0};
  double overall = INFINITY;
  for (double nz : slices) {
    double best = INFINITY;
    std::array<double, 3> x{};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double p = 2 * kPi * a / n, t = 2 * kPi * b / n;
        const double v = product_distance(d, p, t, nz);
        if (v < best) {
          best = v;
          x = {p, t, nz};
        }
      }
    static constexpr std::array<std::array<double, 3>, 5> dirs{
        {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0}}};
    for (double step = 0.05; step > 1e-12; step *= 0.5) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (const auto& dir : dirs)
          for (double sgn : {1.0, -1.0}) {
            auto y = x;
            for (int k = 0; k < 3; ++k) y[k] += sgn * step * dir[k];
            y[2] = std::clamp(y[2], -1.0, 1.0);
            const double v = product_distance(d, y[0], y[1], y[2]);
            if (v < best) {
              best = v;
              x = y;
              moved = true;
            }
          }
      }
    }
    overall = std::min(overall, best);
  }
  return overall;
}

inline Eigen::Matrix4cd to_eigen(const peqrng::qcore::Matrix4& m) {
  Eigen::Matrix4cd e;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e(r, c) = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  return e;
}

inline double spectral_radius(const Eigen::Matrix4cd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  return std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[3]));
}

// For fixed angles the state maximum of |<psi|D|psi>| is the spectral radius
// of the Hermitian operator D.
inline double e_chi_at(const peqrng::certify::PhaseErrorSet& e, const peqrng::chip::MziMmis& mmis,
                       const std::array<double, 4>& a) {
  const Eigen::Vector4cd zz(1, -1, -1, 1);
  const Eigen::Matrix4cd Z = zz.asDiagonal();
  const std::array<std::array<int, 2>, 4> pairs{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  const std::array<double, 4> sign{1, -1, 1, 1};
  Eigen::Matrix4cd D = Eigen::Matrix4cd::Zero();
  for (int k = 0; k < 4; ++k) {
    const auto r = peqrng::chip::RotationSetting::from_angles(a[static_cast<std::size_t>(pairs[k][0])],
                                                               a[static_cast<std::size_t>(pairs[k][1])], e.dphi, e.dtheta);
    const auto ui = to_eigen(peqrng::certify::rotation_reference(r, mmis));
    const auto ur = to_eigen(peqrng::chip::rotation_real(r, mmis));
    D += sign[static_cast<std::size_t>(k)] * (ui.adjoint() * Z * ui - ur.adjoint() * Z * ur);
  }
  return spectral_radius(D);
}

inline double e_p_at(const peqrng::certify::PhaseErrorSet& e, const peqrng::chip::MziMmis& mmis, double phi,
                     double theta) {
  const auto r = peqrng::chip::RotationSetting::from_angles(phi, theta, e.dphi, e.dtheta);
  const auto ui = to_eigen(peqrng::certify::rotation_reference(r, mmis));
  const auto ur = to_eigen(peqrng::chip::rotation_real(r, mmis));
  double m = 0.0;
  for (int k = 0; k < 4; ++k) {
    Eigen::Matrix4cd P = Eigen::Matrix4cd::Zero();
    P(k, k) = 1.0;
    m = std::max(m, spectral_radius(ui.adjoint() * P * ui - ur.adjoint() * P * ur));
  }
  return m;
}

template <class F, std::size_t N>
double grid_then_refine(F f, int per_dim, std::array<double, N> lo, std::array<double, N> hi) {
  std::array<double, N> x{}, best_x{};
  double best = -INFINITY;
  std::array<int, N> idx{};
  for (;;) {
    for (std::size_t k = 0; k < N; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * (idx[k] + 0.5) / per_dim;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
    std::size_t k = 0;
    while (k < N && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == N) break;
  }
  for (double step = (hi[0] - lo[0]) / per_dim; step > 1e-7; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t k = 0; k < N; ++k)
        for (double dir : {1.0, -1.0}) {
          auto y = best_x;
          y[k] += dir * step;
          const double v = f(y);
          if (v > best) {
            best = v;
            best_x = y;
            moved = true;
          }
        }
    }
  }
  return best;
}

// Exact distribution of the resolved outcome of a non-empty bin: Poisson(mean)
// arrivals, channels drawn from p, ties broken uniformly among the fired
// channels (or among all four). Sums over fired sets S by inclusion-exclusion:
// P(fired = S, N >= 1) = sum_{T subset S} (-1)^{|S|-|T|} e^{-mean}(e^{mean p_T} - 1).
inline std::array<double, 4> resolved_distribution(const std::array<double, 4>& p, double mean, bool all_four = false) {
  std::array<double, 4> out{};
  double total = 0.0;
  for (unsigned S = 1; S < 16; ++S) {
    double ps = 0.0;
    for (unsigned T = S;; T = (T - 1) & S) {
      double pt = 0.0;
      for (int c = 0; c < 4; ++c)
        if (T & (1u << c)) pt += p[static_cast<std::size_t>(c)];
      const int parity = __builtin_popcount(S) - __builtin_popcount(T);
      const double term = std::exp(-mean) * std::expm1(mean * pt);
      ps += (parity % 2 ? -term : term);
      if (T == 0) break;
    }
    total += ps;
    const int fired = __builtin_popcount(S);
    for (int c = 0; c < 4; ++c) {
      if (fired == 1 || !all_four) {
        if (S & (1u << c)) out[static_cast<std::size_t>(c)] += ps / fired;
      } else {
        out[static_cast<std::size_t>(c)] += ps / 4.0;
      }
    }
  }
  for (auto& x : out) x /= total;
  return out;
}

// Half-width of a k-sigma binomial interval for a frequency estimate.
inline double binomial_halfwidth(double p, double n, double k = 3.0) { return k * std::sqrt(p * (1 - p) / n) + 1e-12; }

}  // namespace oracle

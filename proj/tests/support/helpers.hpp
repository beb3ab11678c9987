#pragma once

#include <complex>
#include <random>

#include "peqrng/qcore.hpp"

namespace testing_util {

using peqrng::qcore::cplx;
using peqrng::qcore::Matrix2;
using peqrng::qcore::Matrix4;

template <std::size_t N>
double max_diff(const peqrng::qcore::SquareMatrix<N>& a, const peqrng::qcore::SquareMatrix<N>& b) {
  return (a - b).max_abs();
}

// Haar-ish random 2x2 unitary from three angles and a phase.
inline Matrix2 random_unitary2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
  const double a = u(rng), b = u(rng), c = u(rng), g = u(rng);
  const cplx i(0, 1);
  const cplx e = std::exp(i * g);
  return Matrix2({e * std::exp(i * b) * std::cos(a), e * std::exp(i * c) * std::sin(a),
                  -e * std::exp(-i * c) * std::sin(a), e * std::exp(-i * b) * std::cos(a)});
}

inline peqrng::qcore::Vector4 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  peqrng::qcore::Vector4 v;
  double s = 0.0;
  for (auto& z : v) {
    z = cplx(n(rng), n(rng));
    s += std::norm(z);
  }
  for (auto& z : v) z /= std::sqrt(s);
  return v;
}

}  // namespace testing_util

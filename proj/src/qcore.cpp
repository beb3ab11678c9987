#include "peqrng/qcore.hpp"

#include <Eigen/Eigenvalues>

#include "peqrng/error.hpp"
#include "peqrng/tolerances.hpp"

namespace peqrng::qcore {

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::UF: return "UF";
    case Channel::UN: return "UN";
    case Channel::DF: return "DF";
    case Channel::DN: return "DN";
  }
  return "??";
}

Channel channel_from_string(std::string_view s) {
  for (Channel c : kChannels)
    if (to_string(c) == s) return c;
  throw InputError("unknown channel '" + std::string(s) + "'");
}

Matrix2 pauli_x() { return Matrix2({0.0, 1.0, 1.0, 0.0}); }
Matrix2 pauli_y() { return Matrix2({0.0, -kI, kI, 0.0}); }
Matrix2 pauli_z() { return Matrix2({1.0, 0.0, 0.0, -1.0}); }
Matrix2 projector_first() { return Matrix2({1.0, 0.0, 0.0, 0.0}); }
Matrix2 projector_second() { return Matrix2({0.0, 0.0, 0.0, 1.0}); }

Matrix4 tensor_product(const Matrix2& a, const Matrix2& b) {
  Matrix4 m;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

Matrix2 pauli_exponential(double varphi, double vartheta, const Axis& n) {
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > tol::kUnitVector)
    throw InputError("pauli_exponential: axis must be a unit vector");
  const double c = std::cos(vartheta);
  const double s = std::sin(vartheta);
  // n . sigma = [[nz, nx - i ny], [nx + i ny, -nz]]
  const cplx is{0.0, s};
  Matrix2 m({c + is * n[2], is * cplx(n[0], -n[1]), is * cplx(n[0], n[1]), c - is * n[2]});
  return m * std::polar(1.0, varphi);
}

Matrix4 channel_projector(Channel c) {
  std::array<cplx, 4> d{};
  d[index(c)] = 1.0;
  return Matrix4::diagonal(d);
}

QuantumState QuantumState::pure(const Vector4& amplitudes) {
  double n2 = 0.0;
  for (const auto& a : amplitudes) n2 += std::norm(a);
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol::kStateNorm)
    throw InputError("pure state must have unit norm");
  return QuantumState(amplitudes);
}

QuantumState QuantumState::normalized(const Vector4& amplitudes) {
  double n2 = 0.0;
  for (const auto& a : amplitudes) n2 += std::norm(a);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw DegenerateInputError("cannot normalize a zero state vector");
  Vector4 v = amplitudes;
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& a : v) a *= inv;
  return QuantumState(v);
}

QuantumState QuantumState::mixed(const Matrix4& rho) {
  if (!rho.is_hermitian(tol::kHermitian)) throw InputError("density operator must be Hermitian");
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > tol::kStateNorm) throw InputError("density operator must have unit trace");
  if (hermitian_eigenvalues(rho)[0] < -tol::kEigenFloor)
    throw InputError("density operator must be positive semidefinite");
  return QuantumState(rho);
}

QuantumState QuantumState::basis(Channel c) {
  Vector4 v{};
  v[index(c)] = 1.0;
  return QuantumState(v);
}

const Vector4& QuantumState::amplitudes() const {
  if (!is_pure()) throw InputError("amplitudes() requested from a mixed state");
  return std::get<Vector4>(repr_);
}

Matrix4 QuantumState::density() const {
  if (const auto* m = std::get_if<Matrix4>(&repr_)) return *m;
  const auto& v = std::get<Vector4>(repr_);
  Matrix4 rho;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) rho(i, j) = v[i] * std::conj(v[j]);
  return rho;
}

Matrix4 QuantumState::transformed_density(const Matrix4& a) const {
  if (const auto* v = std::get_if<Vector4>(&repr_)) {
    const Vector4 w = a * *v;
    Matrix4 rho;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) rho(i, j) = w[i] * std::conj(w[j]);
    return rho;
  }
  return a * std::get<Matrix4>(repr_) * a.adjoint();
}

QuantumState phi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  return QuantumState::pure({h, 0.0, 0.0, h});
}

QuantumState phi_minus() {
  const double h = 1.0 / std::sqrt(2.0);
  return QuantumState::pure({h, 0.0, 0.0, -h});
}

double born_probability(const QuantumState& state, const Matrix4& projector) {
  if (!projector.is_hermitian(tol::kProjector) || (projector * projector - projector).max_abs() > tol::kProjector)
    throw InputError("born_probability: operator is not a projector");
  double p = 0.0;
  if (state.is_pure()) {
    const auto& v = state.amplitudes();
    const Vector4 pv = projector * v;
    cplx acc{};
    for (std::size_t i = 0; i < 4; ++i) acc += std::conj(v[i]) * pv[i];
    p = acc.real();
  } else {
    p = (state.density() * projector).trace().real();
  }
  if (p < 0.0 && p > -tol::kProbabilityClip) p = 0.0;
  return p;
}

std::array<double, 4> hermitian_eigenvalues(const Matrix4& h) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2), ev(3)};
}

}  // namespace peqrng::qcore

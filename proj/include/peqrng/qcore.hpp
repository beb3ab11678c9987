#pragma once

// Fixed-size complex linear algebra for the two-path-qubit space.
//
// Basis order is fixed everywhere as (|UF>, |UN>, |DF>, |DN>): the absolute
// position qubit (U/D) is the first tensor factor and the relative position
// qubit (F/N) is the second, so index = 2*absolute + relative.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

namespace peqrng::qcore {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

template <std::size_t N>
class SquareMatrix {
 public:
  static constexpr std::size_t kDim = N;

  constexpr SquareMatrix() = default;
  constexpr explicit SquareMatrix(const std::array<cplx, N * N>& entries) : a_(entries) {}

  static constexpr SquareMatrix identity() {
    SquareMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
  static constexpr SquareMatrix diagonal(const std::array<cplx, N>& d) {
    SquareMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  constexpr cplx& operator()(std::size_t i, std::size_t j) { return a_[i * N + j]; }
  constexpr const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * N + j]; }
  constexpr const std::array<cplx, N * N>& entries() const { return a_; }

  SquareMatrix adjoint() const {
    SquareMatrix m;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) m(i, j) = std::conj((*this)(j, i));
    return m;
  }

  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }

  // Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
  }

  bool is_unitary(double tol) const;
  bool is_hermitian(double tol) const { return (*this - adjoint()).max_abs() <= tol; }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    for (std::size_t k = 0; k < N * N; ++k) a_[k] += o.a_[k];
    return *this;
  }
  SquareMatrix& operator-=(const SquareMatrix& o) {
    for (std::size_t k = 0; k < N * N; ++k) a_[k] -= o.a_[k];
    return *this;
  }
  SquareMatrix& operator*=(cplx s) {
    for (auto& z : a_) z *= s;
    return *this;
  }

  friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
  friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
  friend SquareMatrix operator*(SquareMatrix a, cplx s) { return a *= s; }
  friend SquareMatrix operator*(cplx s, SquareMatrix a) { return a *= s; }
  friend SquareMatrix operator-(SquareMatrix a) { return a *= -1.0; }

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    SquareMatrix c;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const cplx aik = a(i, k);
        for (std::size_t j = 0; j < N; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::array<cplx, N> operator*(const SquareMatrix& a, const std::array<cplx, N>& v) {
    std::array<cplx, N> out{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) out[i] += a(i, j) * v[j];
    return out;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::array<cplx, N * N> a_{};
};

template <std::size_t N>
bool SquareMatrix<N>::is_unitary(double tol) const {
  return (adjoint() * (*this) - identity()).max_abs() <= tol;
}

using Matrix2 = SquareMatrix<2>;
using Matrix4 = SquareMatrix<4>;
using Vector4 = std::array<cplx, 4>;
using Axis = std::array<double, 3>;

// Detection channels in basis order.
enum class Channel : int { UF = 0, UN = 1, DF = 2, DN = 3 };
inline constexpr std::array<Channel, 4> kChannels{Channel::UF, Channel::UN, Channel::DF, Channel::DN};

std::string_view to_string(Channel c) noexcept;
Channel channel_from_string(std::string_view s);
constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }

// Single-qubit building blocks.
Matrix2 pauli_x();
Matrix2 pauli_y();
Matrix2 pauli_z();
Matrix2 projector_first();   // P1 = diag(1, 0)
Matrix2 projector_second();  // P2 = diag(0, 1)

// (a (x) b)[2i+k][2j+l] = a[i][j] * b[k][l].
Matrix4 tensor_product(const Matrix2& a, const Matrix2& b);

// e^{i varphi} (cos vartheta I + i sin vartheta (n . sigma)). Throws InputError
// unless |n| = 1 within tol::kUnitVector.
Matrix2 pauli_exponential(double varphi, double vartheta, const Axis& n);

// sqrt(Tr[(u - v)(u - v)^dagger]).
template <std::size_t N>
double hs_distance(const SquareMatrix<N>& u, const SquareMatrix<N>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < N * N; ++k) s += std::norm(u.entries()[k] - v.entries()[k]);
  return std::sqrt(s);
}

// Projector onto a single detection channel, P_a (x) P_b.
Matrix4 channel_projector(Channel c);

// Pure 4-vector or 4x4 density operator on the two-qubit space. Construction
// validates normalization (and Hermiticity / positivity for mixed states).
class QuantumState {
 public:
  static QuantumState pure(const Vector4& amplitudes);
  static QuantumState mixed(const Matrix4& rho);
  static QuantumState basis(Channel c);

  // Normalizes the given nonzero vector; throws DegenerateInputError on zero.
  static QuantumState normalized(const Vector4& amplitudes);

  bool is_pure() const noexcept { return std::holds_alternative<Vector4>(repr_); }
  const Vector4& amplitudes() const;  // pure states only
  Matrix4 density() const;

  // A rho A^dagger (unnormalized result kept as a density operator).
  Matrix4 transformed_density(const Matrix4& a) const;

 private:
  explicit QuantumState(Vector4 v) : repr_(v) {}
  explicit QuantumState(const Matrix4& m) : repr_(m) {}
  std::variant<Vector4, Matrix4> repr_;
};

// Bell basis states.
QuantumState phi_plus();
QuantumState phi_minus();

// Tr[rho P] for a Hermitian idempotent P. Throws InputError otherwise.
double born_probability(const QuantumState& state, const Matrix4& projector);

// Hermitian eigenvalues of a 4x4 matrix, ascending.
std::array<double, 4> hermitian_eigenvalues(const Matrix4& h);

}  // namespace peqrng::qcore

#pragma once

// Every numeric tolerance used by validation code lives here.
namespace peqrng::tol {

inline constexpr double kUnitarity = 1e-12;        // max-entry of U^dagger U - I
inline constexpr double kStateNorm = 1e-12;        // pure-state squared norm, mixed-state trace
inline constexpr double kHermitian = 1e-12;        // max-entry of rho - rho^dagger
inline constexpr double kEigenFloor = 1e-10;       // smallest admissible density eigenvalue is -kEigenFloor
inline constexpr double kProjector = 1e-10;        // Hermitian idempotent check
inline constexpr double kProbabilityClip = 1e-10;  // negative probabilities above -kProbabilityClip are clipped to 0
inline constexpr double kUnitVector = 1e-9;        // |n| = 1 for Pauli axes
inline constexpr double kWeightSum = 1e-12;        // spectrum weights sum to 1
inline constexpr double kDistribution = 1e-9;      // 4-outcome distributions sum to 1

}  // namespace peqrng::tol

#pragma once

#include <cstdint>

namespace peqrng {

// Selects the serial reference path or the OpenMP path of a kernel. Both
// paths produce identical results for the same inputs.
enum class Exec { serial, parallel };

// SplitMix64 finalizer; derives independent per-task seeds from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double unit_uniform(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

int max_threads() noexcept;

}  // namespace peqrng

#pragma once

// Raw-bit mapping of outcomes and seeded Toeplitz-hashing extraction.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peqrng/exec.hpp"
#include "peqrng/qcore.hpp"

namespace peqrng::events {

// Packed bit string; bit i lives in words[i / 64] at position i % 64.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n) : words_((n + 63) / 64, 0), size_(n) {}
  static BitString from_string(std::string_view zeros_and_ones);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = 1ULL << (i & 63);
    if (v)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }
  void push_back(bool v);
  std::size_t count_ones() const;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  std::string to_string() const;
  // Big-endian within each byte (bit 0 is the MSB of byte 0); zero padded.
  std::vector<std::uint8_t> to_bytes() const;
  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

// UF -> 00, UN -> 01, DF -> 10, DN -> 11.
BitString raw_bits(std::span<const qcore::Channel> outcomes);

// floor(k * h_min) - ceil(2 log2(1 / eps)); may be <= 0.
long long extraction_length(std::size_t events, double h_min_bits_per_event, double security_eps);

// Multiplies the input by a seeded m x n random Toeplitz matrix over GF(2),
// m = extraction_length(n / 2, h_min, eps). Throws InputError when m <= 0.
BitString toeplitz_extract(const BitString& bits, double h_min_bits_per_event, double security_eps,
                           std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace peqrng::events

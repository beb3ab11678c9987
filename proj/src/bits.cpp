#include "peqrng/bits.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "peqrng/error.hpp"

namespace peqrng::events {

BitString BitString::from_string(std::string_view zeros_and_ones) {
  BitString b(zeros_and_ones.size());
  for (std::size_t i = 0; i < zeros_and_ones.size(); ++i) {
    const char c = zeros_and_ones[i];
    if (c != '0' && c != '1') throw InputError("bit string may only contain '0' and '1'");
    b.set(i, c == '1');
  }
  return b;
}

void BitString::push_back(bool v) {
  if ((size_ & 63) == 0) words_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

std::size_t BitString::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string BitString::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (nbits > bytes.size() * 8) throw InputError("bit count exceeds byte buffer");
  BitString b(nbits);
  for (std::size_t i = 0; i < nbits; ++i) b.set(i, (bytes[i / 8] >> (7 - i % 8)) & 1u);
  return b;
}

BitString raw_bits(std::span<const qcore::Channel> outcomes) {
  BitString b(2 * outcomes.size());
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto v = qcore::index(outcomes[k]);
    b.set(2 * k, (v >> 1) & 1u);
    b.set(2 * k + 1, v & 1u);
  }
  return b;
}

long long extraction_length(std::size_t events, double h_min_bits_per_event, double security_eps) {
  if (!(h_min_bits_per_event > 0.0 && h_min_bits_per_event <= 1.0))
    throw InputError("h_min per event must lie in (0, 1]");
  if (!(security_eps > 0.0 && security_eps < 1.0)) throw InputError("security epsilon must lie in (0, 1)");
  const auto budget = static_cast<long long>(std::floor(static_cast<double>(events) * h_min_bits_per_event));
  const auto penalty = static_cast<long long>(std::ceil(2.0 * std::log2(1.0 / security_eps) - 1e-9));
  return budget - penalty;
}

namespace {

// 64 bits of `s` starting at bit position `pos`; `s` carries one padding word.
inline std::uint64_t window64(const std::vector<std::uint64_t>& s, std::size_t pos) {
  const std::size_t w = pos >> 6;
  const unsigned off = pos & 63;
  if (off == 0) return s[w];
  return (s[w] >> off) | (s[w + 1] << (64 - off));
}

// Parity of row i of T x, where T[i][j] = seed[i + n - 1 - j] and xr is x reversed.
inline bool toeplitz_row(const std::vector<std::uint64_t>& seed, const std::vector<std::uint64_t>& xr,
                         std::size_t i) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < xr.size(); ++w) acc ^= window64(seed, i + 64 * w) & xr[w];
  return std::popcount(acc) & 1;
}

}  // namespace

BitString toeplitz_extract(const BitString& bits, double h_min_bits_per_event, double security_eps,
                           std::uint64_t seed, Exec exec) {
  if (bits.size() < 2) throw InputError("toeplitz_extract: need at least one event (2 bits)");
  const std::size_t n = bits.size();
  const long long m_signed = extraction_length(n / 2, h_min_bits_per_event, security_eps);
  if (m_signed <= 0) throw InputError("toeplitz_extract: insufficient entropy for the requested security level");
  const auto m = static_cast<std::size_t>(m_signed);

  BitString xr(n);
  for (std::size_t q = 0; q < n; ++q) xr.set(q, bits.get(n - 1 - q));

  // n + m - 1 seed bits, plus enough padding for the shifted 64-bit windows.
  const std::size_t seed_words = (n + m - 1 + 63) / 64 + xr.words().size() + 2;
  std::vector<std::uint64_t> s(seed_words);
  std::mt19937_64 rng(seed);
  for (auto& w : s) w = rng();
  const std::size_t used_bits = n + m - 1;
  const std::size_t tail = used_bits & 63;
  s[used_bits >> 6] &= tail ? ((1ULL << tail) - 1) : 0ULL;
  for (std::size_t w = (used_bits >> 6) + 1; w < s.size(); ++w) s[w] = 0;

  BitString out(m);
  std::vector<std::uint64_t> words((m + 63) / 64, 0);
  const long nwords = static_cast<long>(words.size());
  auto fill_word = [&](long ow) {
    std::uint64_t word = 0;
    const std::size_t base = static_cast<std::size_t>(ow) * 64;
    for (std::size_t b = 0; b < 64 && base + b < m; ++b)
      if (toeplitz_row(s, xr.words(), base + b)) word |= 1ULL << b;
    words[static_cast<std::size_t>(ow)] = word;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long ow = 0; ow < nwords; ++ow) fill_word(ow);
  } else {
    for (long ow = 0; ow < nwords; ++ow) fill_word(ow);
  }
  for (std::size_t i = 0; i < m; ++i) out.set(i, (words[i >> 6] >> (i & 63)) & 1ULL);
  return out;
}

}  // namespace peqrng::events

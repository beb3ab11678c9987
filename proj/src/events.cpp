#include "peqrng/events.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "peqrng/bell.hpp"
#include "peqrng/error.hpp"

namespace peqrng::events {

namespace {

constexpr int kMaxArrivalsPerBin = 256;

Channel sample_channel(const OutcomeDistribution& d, double u) {
  double cum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    cum += d.p[k];
    if (u < cum) return qcore::kChannels[k];
  }
  // Guard against rounding in the cumulative sum: never return a zero-weight channel.
  for (std::size_t k = 4; k-- > 0;)
    if (d.p[k] > 0.0) return qcore::kChannels[k];
  return Channel::DN;
}

}  // namespace

std::int64_t EventStream::bin_count() const {
  return static_cast<std::int64_t>(std::floor(meta.duration_s * 1e6 / meta.bin_width_us + 1e-9));
}

void EventStream::validate() const {
  if (!(meta.duration_s > 0.0) || !(meta.bin_width_us > 0.0))
    throw InputError("event stream: duration and bin width must be positive");
  for (std::size_t k = 1; k < records.size(); ++k)
    if (records[k].timestamp_ns < records[k - 1].timestamp_ns)
      throw InputError("event stream: timestamps must be non-decreasing");
}

EventStream simulate_events(const OutcomeDistribution& dist, double rate_hz, double duration_s, double bin_width_us,
                            std::uint64_t seed) {
  dist.validate();
  if (!(rate_hz >= 0.0) || !std::isfinite(rate_hz)) throw InputError("simulate_events: rate must be >= 0");
  if (!(bin_width_us > 0.0) || !(duration_s > 0.0))
    throw InputError("simulate_events: duration and bin width must be positive");
  const double bin_s = bin_width_us * 1e-6;
  const double mean = rate_hz * bin_s;
  if (!(mean < 1.0)) throw InputError("simulate_events: rate * bin width must be < 1");
  if (duration_s < bin_s) throw InputError("simulate_events: duration shorter than one bin");

  EventStream s;
  s.meta = {0.0, 0.0, rate_hz, duration_s, bin_width_us, seed};
  if (mean == 0.0) return s;

  const std::int64_t bins = s.bin_count();
  const double bin_ns = s.bin_width_ns();
  const double p_first = mean * std::exp(-mean) / -std::expm1(-mean);  // P(N = 1 | N >= 1)
  s.records.reserve(static_cast<std::size_t>(static_cast<double>(bins) * mean * 1.05) + 16);

  std::mt19937_64 rng(seed);
  std::int64_t bin = -1;
  for (;;) {
    // Empty bins before the next occupied one are geometric with P(empty) = e^{-mean}.
    const double u = 1.0 - unit_uniform(rng);
    const double gap = std::floor(-std::log(u) / mean);
    if (gap >= static_cast<double>(bins - bin)) break;
    bin += static_cast<std::int64_t>(gap) + 1;
    if (bin >= bins) break;

    // Zero-truncated Poisson count by inversion.
    const double v = unit_uniform(rng);
    int count = 1;
    double pk = p_first;
    double cum = pk;
    while (v >= cum && count < kMaxArrivalsPerBin) {
      ++count;
      pk *= mean / count;
      cum += pk;
      if (pk == 0.0) break;
    }
    const auto ts = static_cast<std::int64_t>(std::llround(static_cast<double>(bin) * bin_ns));
    for (int a = 0; a < count; ++a) s.records.push_back({ts, sample_channel(dist, unit_uniform(rng))});
  }
  return s;
}

std::vector<EventStream> simulate_streams(std::span<const OutcomeDistribution> dists, double rate_hz,
                                          double duration_s, double bin_width_us, std::uint64_t master_seed,
                                          Exec exec) {
  std::vector<EventStream> out(dists.size());
  const long n = static_cast<long>(dists.size());
  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
      try {
        const auto i = static_cast<std::size_t>(k);
        out[i] = simulate_events(dists[i], rate_hz, duration_s, bin_width_us,
                                 derive_seed(master_seed, static_cast<std::uint64_t>(k)));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out[i] = simulate_events(dists[i], rate_hz, duration_s, bin_width_us,
                               derive_seed(master_seed, static_cast<std::uint64_t>(k)));
    }
  }
  return out;
}

std::vector<ResolvedOutcome> bin_and_resolve(const EventStream& s, std::uint64_t tie_seed, TieMode mode) {
  std::vector<ResolvedOutcome> out;
  out.reserve(s.records.size());
  std::mt19937_64 rng(tie_seed);
  const auto& r = s.records;
  for (std::size_t k = 0; k < r.size();) {
    const std::int64_t ts = r[k].timestamp_ns;
    unsigned mask = 0;
    for (; k < r.size() && r[k].timestamp_ns == ts; ++k) mask |= 1u << qcore::index(r[k].channel);
    const int fired = std::popcount(mask);
    if (fired == 1) {
      out.push_back({ts, qcore::kChannels[static_cast<std::size_t>(std::countr_zero(mask))]});
      continue;
    }
    if (mode == TieMode::all_four) {
      const auto pick = static_cast<std::size_t>(unit_uniform(rng) * 4.0);
      out.push_back({ts, qcore::kChannels[std::min<std::size_t>(pick, 3)]});
      continue;
    }
    auto pick = static_cast<int>(unit_uniform(rng) * fired);
    pick = std::min(pick, fired - 1);
    for (std::size_t c = 0; c < 4; ++c) {
      if (!(mask & (1u << c))) continue;
      if (pick-- == 0) {
        out.push_back({ts, qcore::kChannels[c]});
        break;
      }
    }
  }
  return out;
}

std::vector<Channel> channels_of(std::span<const ResolvedOutcome> outcomes) {
  std::vector<Channel> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.channel);
  return out;
}

OutcomeDistribution estimate_probabilities(std::span<const Channel> outcomes) {
  if (outcomes.empty()) throw InputError("estimate_probabilities: no outcomes");
  std::array<std::size_t, 4> counts{};
  for (Channel c : outcomes) ++counts[qcore::index(c)];
  OutcomeDistribution d;
  const auto total = static_cast<double>(outcomes.size());
  for (std::size_t k = 0; k < 4; ++k) d.p[k] = static_cast<double>(counts[k]) / total;
  return d;
}

OutcomeDistribution estimate_probabilities(std::span<const ResolvedOutcome> outcomes) {
  const auto ch = channels_of(outcomes);
  return estimate_probabilities(std::span<const Channel>(ch));
}

std::vector<std::optional<OutcomeDistribution>> window_distributions(std::span<const ResolvedOutcome> outcomes,
                                                                     double duration_s, double window_s) {
  if (!(window_s > 0.0) || !(duration_s > 0.0)) throw InputError("window and duration must be positive");
  const auto windows = static_cast<std::size_t>(std::floor(duration_s / window_s + 1e-9));
  const double window_ns = window_s * 1e9;
  std::vector<std::array<std::size_t, 4>> counts(windows, std::array<std::size_t, 4>{});
  for (const auto& o : outcomes) {
    const double w = std::floor(static_cast<double>(o.timestamp_ns) / window_ns);
    if (w < 0.0 || w >= static_cast<double>(windows)) continue;
    ++counts[static_cast<std::size_t>(w)][qcore::index(o.channel)];
  }
  std::vector<std::optional<OutcomeDistribution>> out(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    const std::size_t total = counts[w][0] + counts[w][1] + counts[w][2] + counts[w][3];
    if (total == 0) continue;
    OutcomeDistribution d;
    for (std::size_t k = 0; k < 4; ++k) d.p[k] = static_cast<double>(counts[w][k]) / static_cast<double>(total);
    out[w] = d;
  }
  return out;
}

WindowedTrace windowed_traces(const ChshStreams& streams, double window_s, double confidence,
                              std::uint64_t tie_seed, TieMode mode) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw InputError("confidence must lie in (0, 1)");
  const double duration = streams[0].meta.duration_s;
  for (const auto& s : streams) {
    s.validate();
    if (std::abs(s.meta.duration_s - duration) > 1e-12)
      throw InputError("windowed_traces: streams must share one duration");
  }

  WindowedTrace tr;
  tr.window_s = window_s;
  tr.confidence = confidence;
  std::array<std::vector<std::optional<OutcomeDistribution>>, 4> per_stream;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto outcomes = bin_and_resolve(streams[k], derive_seed(tie_seed, k), mode);
    per_stream[k] = window_distributions(outcomes, duration, window_s);
  }
  const std::size_t windows = per_stream[0].size();
  if (windows < 2) throw InputError("windowed_traces: fewer than 2 windows");

  tr.probabilities.resize(windows);
  tr.chi.resize(windows);
  std::vector<double> used;
  for (std::size_t w = 0; w < windows; ++w) {
    bool complete = true;
    for (std::size_t k = 0; k < 4; ++k) {
      tr.probabilities[w][k] = per_stream[k][w];
      complete = complete && per_stream[k][w].has_value();
    }
    if (!complete) continue;
    const double chi = bell::chi_from_coefficients(
        bell::correlation_coefficient(*per_stream[0][w]), bell::correlation_coefficient(*per_stream[1][w]),
        bell::correlation_coefficient(*per_stream[2][w]), bell::correlation_coefficient(*per_stream[3][w]));
    tr.chi[w] = chi;
    used.push_back(chi);
  }
  if (used.size() < 2) throw InputError("windowed_traces: fewer than 2 windows with events on all streams");

  tr.windows_used = used.size();
  double mean = 0.0;
  for (double c : used) mean += c;
  mean /= static_cast<double>(used.size());
  double ss = 0.0;
  for (double c : used) ss += (c - mean) * (c - mean);
  tr.mean_chi = mean;
  tr.stddev_chi = std::sqrt(ss / static_cast<double>(used.size() - 1));
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
  const double half = z * tr.stddev_chi / std::sqrt(static_cast<double>(used.size()));
  tr.ci_low = mean - half;
  tr.ci_high = mean + half;
  return tr;
}

}  // namespace peqrng::events

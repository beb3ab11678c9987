#pragma once

// Detection-event streams: Monte Carlo generation, time-bin resolution,
// empirical probabilities and windowed traces.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "peqrng/chip.hpp"
#include "peqrng/exec.hpp"

namespace peqrng::events {

using chip::OutcomeDistribution;
using qcore::Channel;

struct DetectionRecord {
  std::int64_t timestamp_ns = 0;  // start of the time bin
  Channel channel = Channel::UF;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct StreamMeta {
  double phi_rad = 0.0;
  double theta_rad = 0.0;
  double rate_hz = 0.0;
  double duration_s = 1.0;
  double bin_width_us = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const StreamMeta&, const StreamMeta&) = default;
};

struct EventStream {
  std::vector<DetectionRecord> records;  // timestamps non-decreasing
  StreamMeta meta;

  std::int64_t bin_count() const;
  double bin_width_ns() const { return meta.bin_width_us * 1e3; }
  void validate() const;

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct ResolvedOutcome {
  std::int64_t timestamp_ns = 0;
  Channel channel = Channel::UF;

  friend bool operator==(const ResolvedOutcome&, const ResolvedOutcome&) = default;
};

// How a bin with clicks on several channels is reduced to one outcome.
enum class TieMode {
  firing_channels,  // uniform among the channels that fired
  all_four,         // uniform among all four channels
};

// Per-bin Poisson arrivals with mean rate * bin width; each arrival's channel
// drawn independently from `dist`. Reproducible from `seed`.
EventStream simulate_events(const OutcomeDistribution& dist, double rate_hz, double duration_s, double bin_width_us,
                            std::uint64_t seed);

// One stream per distribution, seeded with derive_seed(master_seed, k).
std::vector<EventStream> simulate_streams(std::span<const OutcomeDistribution> dists, double rate_hz,
                                          double duration_s, double bin_width_us, std::uint64_t master_seed,
                                          Exec exec = Exec::parallel);

// Drops empty bins and resolves multi-click bins to a single outcome.
std::vector<ResolvedOutcome> bin_and_resolve(const EventStream& s, std::uint64_t tie_seed,
                                             TieMode mode = TieMode::firing_channels);

std::vector<Channel> channels_of(std::span<const ResolvedOutcome> outcomes);

// N_ab / sum N. Throws InputError on an empty list.
OutcomeDistribution estimate_probabilities(std::span<const Channel> outcomes);
OutcomeDistribution estimate_probabilities(std::span<const ResolvedOutcome> outcomes);

// Splits outcomes into consecutive windows of `window_s` over `duration_s`
// (trailing partial window dropped); windows without outcomes are nullopt.
std::vector<std::optional<OutcomeDistribution>> window_distributions(std::span<const ResolvedOutcome> outcomes,
                                                                     double duration_s, double window_s);

// Four streams for one CHSH quadruple, ordered
// (phi, theta), (phi, theta'), (phi', theta), (phi', theta').
using ChshStreams = std::array<EventStream, 4>;

struct WindowedTrace {
  double window_s = 0.05;
  double confidence = 0.99;
  // probabilities[w][k]: window w, stream k; nullopt when that stream had no
  // outcome in the window.
  std::vector<std::array<std::optional<OutcomeDistribution>, 4>> probabilities;
  std::vector<std::optional<double>> chi;  // per window, nullopt if any stream was empty
  double mean_chi = 0.0;
  double stddev_chi = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t windows_used = 0;
};

// Per-window probabilities and chi, with a normal-approximation confidence
// interval mean +- z * stddev / sqrt(N). Needs at least two usable windows.
WindowedTrace windowed_traces(const ChshStreams& streams, double window_s = 0.05, double confidence = 0.99,
                              std::uint64_t tie_seed = 0, TieMode mode = TieMode::firing_channels);

}  // namespace peqrng::events

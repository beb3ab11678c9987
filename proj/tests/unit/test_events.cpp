#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "peqrng/bell.hpp"
#include "peqrng/bits.hpp"
#include "peqrng/error.hpp"
#include "peqrng/events.hpp"

using namespace peqrng;
using namespace peqrng::events;

namespace {

EventStream manual(std::vector<DetectionRecord> r, double duration_s = 1e-3) {
  EventStream s;
  s.records = std::move(r);
  s.meta.duration_s = duration_s;
  s.meta.bin_width_us = 1.0;
  return s;
}

std::array<std::size_t, 4> count_records(const EventStream& s) {
  std::array<std::size_t, 4> c{};
  for (const auto& r : s.records) ++c[qcore::index(r.channel)];
  return c;
}

}  // namespace

TEST_CASE("simulate events basics") {
  CHECK(simulate_events({{0.25, 0.25, 0.25, 0.25}}, 0, 1, 1, 1).records.empty());
  const auto uf = simulate_events({{1, 0, 0, 0}}, 120000, 0.1, 1, 7);
  CHECK_FALSE(uf.records.empty());
  for (const auto& r : uf.records) CHECK(r.channel == Channel::UF);
  CHECK_NOTHROW(uf.validate());
  CHECK(uf.bin_count() == 100000);
  CHECK(uf.meta.seed == 7);

  CHECK_THROWS_AS(simulate_events({{1, 0, 0, 0}}, -1, 1, 1, 1), InputError);
  CHECK_THROWS_AS(simulate_events({{1, 0, 0, 0}}, 2e6, 1, 1, 1), InputError);
  CHECK_THROWS_AS(simulate_events({{1, 0, 0, 0}}, 1e3, 0, 1, 1), InputError);
  CHECK_THROWS_AS(simulate_events({{1, 0, 0, 0}}, 1e3, 1e-7, 1, 1), InputError);
  CHECK_THROWS_AS(simulate_events({{0.7, 0.7, 0, 0}}, 1e3, 1, 1, 1), InputError);
}

TEST_CASE("arrival statistics") {
  const chip::OutcomeDistribution d{{0.5, 0, 0, 0.5}};
  const auto s = simulate_events(d, 120000, 1.0, 1.0, 42);
  const auto c = count_records(s);
  const double n = static_cast<double>(s.records.size());
  CHECK(c[1] == 0);
  CHECK(c[2] == 0);
  CHECK(std::abs(c[0] / n - 0.5) <= oracle::binomial_halfwidth(0.5, n));
  // Poisson total with mean rate * duration.
  CHECK(std::abs(n - 120000) <= 4 * std::sqrt(120000.0));
  // Occupied bins: binomial with p = 1 - e^{-0.12}.
  std::size_t occupied = 0;
  for (std::size_t k = 0; k < s.records.size(); ++k)
    if (k == 0 || s.records[k].timestamp_ns != s.records[k - 1].timestamp_ns) ++occupied;
  const double p1 = -std::expm1(-0.12);
  CHECK(std::abs(static_cast<double>(occupied) - 1e6 * p1) <= 4 * std::sqrt(1e6 * p1 * (1 - p1)));
  for (const auto& r : s.records) CHECK_FALSE(r.timestamp_ns % 1000);
}

TEST_CASE("seed determinism") {
  const chip::OutcomeDistribution d{{0.4, 0.1, 0.2, 0.3}};
  const auto a = simulate_events(d, 120000, 0.2, 1, 5);
  const auto b = simulate_events(d, 120000, 0.2, 1, 5);
  const auto c = simulate_events(d, 120000, 0.2, 1, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(bin_and_resolve(a, 3) == bin_and_resolve(b, 3));

  const std::array<chip::OutcomeDistribution, 4> ds{d, d, d, d};
  const auto p = simulate_streams(ds, 120000, 0.2, 1, 77);
  const auto q = simulate_streams(ds, 120000, 0.2, 1, 77, Exec::serial);
  REQUIRE(p.size() == 4);
  CHECK(p == q);
  CHECK(p[2] == simulate_events(d, 120000, 0.2, 1, derive_seed(77, 2)));
  CHECK_FALSE(p[0] == p[1]);
}

TEST_CASE("bin and resolve") {
  const auto single = manual({{0, Channel::UN}, {1000, Channel::DF}, {5000, Channel::UF}});
  const auto r = bin_and_resolve(single, 1);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == ResolvedOutcome{0, Channel::UN});
  CHECK(r[1] == ResolvedOutcome{1000, Channel::DF});
  CHECK(r[2] == ResolvedOutcome{5000, Channel::UF});
  CHECK(bin_and_resolve(manual({}), 1).empty());

  // Same channel twice in a bin is one fired channel.
  const auto twice = bin_and_resolve(manual({{0, Channel::DN}, {0, Channel::DN}}), 1);
  REQUIRE(twice.size() == 1);
  CHECK(twice[0].channel == Channel::DN);

  const auto tie = manual({{0, Channel::UF}, {0, Channel::DN}});
  int uf = 0, other = 0;
  std::array<int, 4> four{};
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto o = bin_and_resolve(tie, seed);
    REQUIRE(o.size() == 1);
    if (o[0].channel == Channel::UF)
      ++uf;
    else if (o[0].channel != Channel::DN)
      ++other;
    ++four[qcore::index(bin_and_resolve(tie, seed, TieMode::all_four)[0].channel)];
  }
  CHECK(other == 0);
  CHECK(std::abs(uf - 5000) <= 200);
  for (int f : four) CHECK(std::abs(f - 2500) <= 4 * std::sqrt(10000 * 0.25 * 0.75));
}

TEST_CASE("resolved distribution matches the exact per-bin oracle") {
  const auto cfg = chip::ChipConfig::characterized();
  const auto d = chip::broadband_probabilities(cfg, chip::RotationSetting::from_angles(-0.576, -1.11));
  const auto s = simulate_events(d, 120000, 1.0, 1.0, 2024);
  for (bool all_four : {false, true}) {
    const auto outcomes = bin_and_resolve(s, 9, all_four ? TieMode::all_four : TieMode::firing_channels);
    const auto est = estimate_probabilities(outcomes);
    const auto exact = oracle::resolved_distribution(d.p, 0.12, all_four);
    const double n = static_cast<double>(outcomes.size());
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(est.p[k] - exact[k]) <= oracle::binomial_halfwidth(exact[k], n, 4));
    CHECK(est.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The oracle reduces to d when multi-arrival bins vanish.
  const auto lim = oracle::resolved_distribution(d.p, 1e-9);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(lim[k] - d.p[k]) <= 1e-8);
  // raw bits length follows the non-empty bin count.
  const auto o = bin_and_resolve(s, 1);
  const auto ch = channels_of(o);
  CHECK(raw_bits(ch).size() == 2 * o.size());
}

TEST_CASE("estimate probabilities") {
  const std::vector<Channel> a{Channel::UF, Channel::UF, Channel::DN, Channel::DN};
  CHECK(estimate_probabilities(a).p == std::array<double, 4>{0.5, 0, 0, 0.5});
  const std::vector<Channel> one{Channel::UF};
  CHECK(estimate_probabilities(one).p == std::array<double, 4>{1, 0, 0, 0});
  CHECK_THROWS_AS(estimate_probabilities(std::vector<Channel>{}), InputError);

  // Ideal |phi+> at phi = theta.
  const auto d = chip::broadband_probabilities(chip::ChipConfig::ideal(), chip::RotationSetting::from_angles(0.4, 0.4));
  const auto s = simulate_events(d, 100000, 1.0, 1.0, 3);
  const auto est = estimate_probabilities(bin_and_resolve(s, 4));
  CHECK(est[Channel::UN] <= 1e-12);
  CHECK(est[Channel::DF] <= 1e-12);
  CHECK(std::abs(est[Channel::UF] - 0.5) <= oracle::binomial_halfwidth(0.5, 9e4, 4));
}

TEST_CASE("stream validation") {
  CHECK_THROWS_AS(manual({{1000, Channel::UF}, {0, Channel::UF}}).validate(), InputError);
  auto s = manual({});
  s.meta.bin_width_us = 0;
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("window distributions") {
  std::vector<ResolvedOutcome> o;
  for (int k = 0; k < 102; ++k) o.push_back({static_cast<std::int64_t>(k) * 10'000'000, k % 5 < 3 ? Channel::UF : Channel::UN});
  const auto w = window_distributions(o, 1.02, 0.05);
  REQUIRE(w.size() == 20);
  for (const auto& x : w) {
    REQUIRE(x.has_value());
    CHECK(x->p == std::array<double, 4>{0.6, 0.4, 0, 0});
  }
  const auto gaps = window_distributions(std::vector<ResolvedOutcome>{{0, Channel::DF}}, 0.1, 0.05);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].has_value());
  CHECK_FALSE(gaps[1].has_value());
  CHECK_THROWS_AS(window_distributions(o, 1.0, 0.0), InputError);
}

TEST_CASE("windowed traces") {
  // Constant synthetic windows: one record per 10 ms, same pattern everywhere.
  ChshStreams s;
  const std::array<Channel, 4> ch{Channel::UF, Channel::UN, Channel::DN, Channel::DN};
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<DetectionRecord> r;
    for (int t = 0; t < 100; ++t) r.push_back({static_cast<std::int64_t>(t) * 10'000'000, ch[k]});
    s[k] = manual(r, 1.0);
  }
  const auto tr = windowed_traces(s);
  CHECK(tr.probabilities.size() == 20);
  CHECK(tr.windows_used == 20);
  CHECK(tr.mean_chi == doctest::Approx(4.0));
  CHECK(tr.ci_high - tr.ci_low == 0.0);

  const auto cfg = chip::ChipConfig::characterized();
  const std::array<double, 4> a{-0.576, -1.445, -1.11, -1.87};
  const std::array<std::array<std::size_t, 2>, 4> idx{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  std::array<chip::OutcomeDistribution, 4> d;
  for (std::size_t k = 0; k < 4; ++k)
    d[k] = chip::broadband_probabilities(cfg, chip::RotationSetting::from_angles(a[idx[k][0]], a[idx[k][1]]));
  const auto v = simulate_streams(d, 120000, 1.0, 1.0, 11);
  const auto t = windowed_traces({v[0], v[1], v[2], v[3]});
  CHECK(t.windows_used == 20);
  CHECK(t.ci_low < t.mean_chi);
  CHECK(t.mean_chi < t.ci_high);
  for (const auto& w : t.probabilities)
    for (const auto& p : w) CHECK(p->sum() == doctest::Approx(1.0).epsilon(1e-9));
  // 2.5758 z-value for 99%.
  CHECK((t.ci_high - t.mean_chi) == doctest::Approx(2.5758293 * t.stddev_chi / std::sqrt(20.0)).epsilon(1e-6));
  // Narrower windows, smaller per-window counts, larger scatter.
  const auto t10 = windowed_traces({v[0], v[1], v[2], v[3]}, 0.01);
  CHECK(t10.windows_used == 100);
  CHECK(t10.stddev_chi > t.stddev_chi);

  for (auto& x : s) x.meta.duration_s = 0.06;
  CHECK_THROWS_AS(windowed_traces(s), InputError);
  CHECK_THROWS_AS(windowed_traces({v[0], v[1], v[2], v[3]}, 0.05, 1.0), InputError);
}

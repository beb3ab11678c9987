#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "peqrng/app/calibration.hpp"
#include "peqrng/app/config.hpp"
#include "peqrng/app/formats.hpp"
#include "peqrng/app/workflows.hpp"
#include "peqrng/error.hpp"

using namespace peqrng;
using namespace peqrng::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("peqrng_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<CalibrationSample> synth(double a, double b, double c, double d, int port, int n, double w_hi,
                                     double noise = 0.0, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  std::vector<CalibrationSample> s;
  for (int k = 0; k < n; ++k) {
    const double w = w_hi * k / (n - 1);
    const double f = port == 1 ? std::cos(b * w + d) : std::sin(b * w + d);
    s.push_back({w, a * f * f + c + (noise > 0 ? g(rng) : 0.0)});
  }
  return s;
}

}  // namespace

TEST_CASE("number formatting round trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int n = 0; n < 1000; ++n) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(parse_double(format_double(v), "v") == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(120000) == "120000");
  CHECK_THROWS_AS(parse_double("1.5x", "v"), InputError);
  CHECK_THROWS_AS(parse_double("", "v"), InputError);
  CHECK(parse_u64("18446744073709551615", "s") == 18446744073709551615ULL);
  CHECK_THROWS_AS(parse_u64("-1", "s"), InputError);
}

TEST_CASE("chip documents round trip") {
  for (const auto& doc : {ChipDocument::ideal(), ChipDocument::characterized()}) {
    const auto text = to_json_text(doc);
    const auto back = chip_document_from_json_text(text);
    CHECK(back == doc);
    CHECK(to_json_text(back) == text);
    CHECK_NOTHROW(back.validate());
  }
  auto doc = ChipDocument::characterized();
  doc.phi_u = MmiSpec{};  // flat T, R are not stored alongside a table
  doc.phi_u.table = {{720, 0.38, 0.62}, {740, 0.42, 0.58}};
  doc.spectrum.kind = "table";
  doc.spectrum.nodes = {{725, 0.25}, {735, 0.75}};
  doc.chi_minus.angles.reset();
  const auto text = to_json_text(doc);
  CHECK(to_json_text(chip_document_from_json_text(text)) == text);
  CHECK(chip_document_from_json_text(text) == doc);
}

TEST_CASE("shipped configs") {
  const fs::path dir = PEQRNG_SOURCE_DIR "/configs";
  CHECK(load_chip_document(dir / "ideal_chip.json") == ChipDocument::ideal());
  CHECK(load_chip_document(dir / "characterized_chip.json") == ChipDocument::characterized());
  CHECK(read_text(dir / "ideal_chip.json") == to_json_text(ChipDocument::ideal()));
}

TEST_CASE("chip document semantics") {
  const auto doc = ChipDocument::characterized();
  const auto cfg = doc.chip_config();
  CHECK(cfg.mzi_mmis.phi_u.t == doctest::Approx(std::sqrt(0.4)));
  CHECK(cfg.loss.gamma == doctest::Approx(0.98));
  CHECK(doc.error_case("plus").errors == certify::PhaseErrorSet::table1_chi_plus());
  CHECK(doc.error_case("minus").errors == certify::PhaseErrorSet::table1_chi_minus());
  CHECK_THROWS_AS(doc.error_case("other"), InputError);

  // Errors feed the simulation only when asked.
  auto with = doc;
  with.simulate_with_errors = true;
  const auto a = chsh_distributions(doc, "plus", *doc.chi_plus.angles);
  const auto b = chsh_distributions(with, "plus", *doc.chi_plus.angles);
  CHECK(a[0].p != b[0].p);
}

TEST_CASE("invalid chip documents") {
  CHECK_THROWS_AS(chip_document_from_json_text("{"), InputError);
  CHECK_THROWS_AS(chip_document_from_json_text(R"({"format":"other","version":1})"), InputError);
  auto j = nlohmann::json::parse(to_json_text(ChipDocument::ideal()));
  j["version"] = 99;
  CHECK_THROWS_AS(chip_document_from_json_text(j.dump()), InputError);
  j = nlohmann::json::parse(to_json_text(ChipDocument::ideal()));
  j["mmi"]["phi_u"]["T"] = 0.9;
  CHECK_THROWS(chip_document_from_json_text(j.dump()));
  const auto base = nlohmann::json::parse(to_json_text(ChipDocument::characterized()));
  for (const char* section : {"", "mmi", "generation", "loss", "spectrum", "phases", "cases", "run"}) {
    j = base;
    auto& target = *section ? j[section] : j;
    target["simulate_with_error"] = true;
    CAPTURE(section);
    CHECK_THROWS_AS(chip_document_from_json_text(j.dump()), InputError);
  }
  j = base;
  j["mmi"]["theta_n"]["t"] = 0.4;
  CHECK_THROWS_AS(chip_document_from_json_text(j.dump()), InputError);
  j = base;
  j["cases"]["plus"]["angle"] = 0.0;
  CHECK_THROWS_AS(chip_document_from_json_text(j.dump()), InputError);
  auto doc = ChipDocument::ideal();
  doc.run.rate_hz = -1;
  CHECK_THROWS_AS(doc.validate(), InputError);
  doc = ChipDocument::characterized();
  doc.chi_plus.errors.dtheta[0] = 1.0;
  CHECK_THROWS_AS(doc.validate(), RangeError);
  CHECK_THROWS_AS(resolve_config_path("/nonexistent/peqrng.json"), InputError);
}

TEST_CASE("event files round trip") {
  const auto dir = scratch("events");
  auto s = events::simulate_events({{0.4, 0.1, 0.2, 0.3}}, 120000, 0.05, 1.0, 17);
  s.meta.phi_rad = -0.576;
  s.meta.theta_rad = 0.1 + 0.2;
  const auto text = events_to_tsv(s);
  CHECK(text.rfind("#peqrng-events v1\n", 0) == 0);
  CHECK(events_from_tsv(text) == s);
  write_events(s, dir / "a.tsv");
  CHECK(read_events(dir / "a.tsv") == s);
  CHECK(read_text(dir / "a.tsv") == text);
  // Only the final file remains after an atomic write.
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);

  CHECK_THROWS_AS(events_from_tsv("#peqrng-events v2\n"), InputError);
  CHECK_THROWS_AS(events_from_tsv("#peqrng-events v1\n# duration_s=1\n# bin_width_us=1\n5\tXX\n"), InputError);
  CHECK_THROWS_AS(events_from_tsv("#peqrng-events v1\n# duration_s=1\n# bin_width_us=1\n5000\tUF\n1000\tUF\n"),
                  InputError);
  CHECK_THROWS_AS(read_events(dir / "missing.tsv"), InputError);
}

TEST_CASE("grid files round trip") {
  bell::CorrelationGrid g({-0.1, 0.2, 0.30000000000000004}, {-2.0, 0.0});
  g.E = {0.5, std::nullopt, -0.25, 1.0 / 3.0, 0.0, -1.0};
  g.std_errors = {0.01, std::nullopt, 0.02, 0.03, std::nullopt, 0.04};
  const auto text = grid_to_tsv(g);
  const auto back = grid_from_tsv(text);
  CHECK(back.phi_values == g.phi_values);
  CHECK(back.theta_values == g.theta_values);
  CHECK(back.E == g.E);
  CHECK(back.std_errors == g.std_errors);
  CHECK(grid_to_tsv(back) == text);

  bell::CorrelationGrid plain({0.0, 1.0}, {0.0, 1.0});
  for (auto& e : plain.E) e = 0.5;
  CHECK(grid_to_tsv(grid_from_tsv(grid_to_tsv(plain))) == grid_to_tsv(plain));
  CHECK_THROWS_AS(grid_from_tsv("#peqrng-grid v1\nphi_rad\ttheta_rad\tE\tstderr\n0\t0\t1.5\tNA\n"), InputError);
}

TEST_CASE("sample files round trip") {
  const auto s = synth(1, 0.8, 0.1, 0.3, 1, 20, 5);
  const auto text = samples_to_tsv(s);
  CHECK(samples_from_tsv(text) == s);
  CHECK(samples_to_tsv(samples_from_tsv(text)) == text);
  CHECK(samples_from_tsv("# comment\n1\t2\n").size() == 1);
  CHECK_THROWS_AS(samples_from_tsv("1 2 3\n"), InputError);
}

TEST_CASE("calibration recovers noiseless parameters") {
  for (int port : {1, 2}) {
    const auto s = synth(1.0, 0.8, 0.1, 0.3, port, 60, 6.0);
    const auto f = fit_mzi_calibration(s, port);
    CHECK(std::abs(f.a - 1.0) <= 1e-6);
    CHECK(std::abs(f.b - 0.8) <= 1e-6);
    CHECK(std::abs(f.c - 0.1) <= 1e-6);
    CHECK(std::abs(f.d - 0.3) <= 1e-6);
    CHECK(f.rms <= 1e-9);
    CHECK(f.port == port);
    CHECK(f.samples == 60);
    const double g = port == 1 ? std::cos(0.8 * 1.7 + 0.3) : std::sin(0.8 * 1.7 + 0.3);
    CHECK(f.intensity(1.7) == doctest::Approx(g * g + 0.1).epsilon(1e-6));
    CHECK(f.phase(2.0) == doctest::Approx(1.9));
  }
  // d outside [0, pi) comes back in canonical form.
  const auto f = fit_mzi_calibration(synth(2.0, 1.3, 0.0, 2.9 + std::numbers::pi, 1, 40, 4.0), 1);
  CHECK(std::abs(f.d - 2.9) <= 1e-6);
  CHECK(std::abs(f.b - 1.3) <= 1e-6);
}

TEST_CASE("calibration failures") {
  std::vector<CalibrationSample> flat;
  for (int k = 0; k < 20; ++k) flat.push_back({0.1 * k, 0.7});
  CHECK_THROWS_AS(fit_mzi_calibration(flat, 1), FitError);
  const auto few = synth(1, 0.8, 0.1, 0.3, 1, 7, 6.0);
  CHECK_THROWS_AS(fit_mzi_calibration(few, 1), InputError);
  const auto s = synth(1, 0.8, 0.1, 0.3, 1, 20, 6.0);
  CHECK_THROWS_AS(fit_mzi_calibration(s, 3), InputError);
  // Far less than half a fringe.
  const auto narrow = synth(1, 0.8, 0.1, 0.3, 1, 20, 0.3);
  CHECK_THROWS_AS(fit_mzi_calibration(narrow, 1), FitError);
}

TEST_CASE("calibration errors cover the truth under noise") {
  std::array<int, 4> inside{};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = synth(1.0, 0.8, 0.1, 0.3, 1, 50, 6.0, 0.01, seed);
    const auto f = fit_mzi_calibration(s, 1);
    inside[0] += std::abs(f.a - 1.0) <= 3 * f.a_err;
    inside[1] += std::abs(f.b - 0.8) <= 3 * f.b_err;
    inside[2] += std::abs(f.c - 0.1) <= 3 * f.c_err;
    inside[3] += std::abs(f.d - 0.3) <= 3 * f.d_err;
  }
  for (int k : inside) CHECK(k >= 97);
}

TEST_CASE("parse helpers") {
  CHECK(parse_angles("-0.576,-1.445,-1.11,-1.87") == std::array<double, 4>{-0.576, -1.445, -1.11, -1.87});
  CHECK_THROWS_AS(parse_angles("1,2,3"), InputError);
  CHECK_THROWS_AS(parse_angles("1,2,3,x"), InputError);
  CHECK(stream_file_name(2) == "stream_2.tsv");
  auto doc = ChipDocument::ideal();
  RunOverrides o;
  o.rate_hz = 5000;
  o.seed = 9;
  o.apply(doc);
  CHECK(doc.run.rate_hz == 5000);
  CHECK(doc.seed == 9);
}

TEST_CASE("ideal pipeline") {
  const auto dir = scratch("ideal");
  const auto doc = ChipDocument::ideal();
  SimulateOptions so;
  so.out_dir = dir / "sim";
  const auto sim = run_simulate(doc, so);
  CHECK(sim.files.size() == 4);
  CHECK(std::abs(sim.noiseless_chi - 2 * std::numbers::sqrt2) <= 1e-9);

  AnalyzeOptions ao;
  ao.events_dir = dir / "sim";
  ao.out_dir = dir / "an";
  const auto an = run_analyze(doc, ao);
  CHECK(std::abs(an.chi - 2 * std::numbers::sqrt2) <= 0.03);
  CHECK(fs::exists(dir / "an" / "traces.csv"));

  CertifyOptions co;
  co.chi_document = dir / "an" / "analysis.json";
  co.out = dir / "cert.json";
  const auto ce = run_certify(doc, co);
  CHECK(ce.result.e_chi <= 1e-9);
  CHECK(ce.result.e_p <= 1e-9);
  CHECK(ce.result.certified);
  CHECK(ce.result.h_min_bits >= 0.7);

  const auto summary = run_report({dir / "cert.json", dir / "an" / "analysis.json"}, dir / "report");
  CHECK(summary.find("h_min") != std::string::npos);
  CHECK(fs::exists(dir / "report" / "summary.txt"));
}

TEST_CASE("characterized pipeline") {
  const auto dir = scratch("characterized");
  const auto doc = ChipDocument::characterized();
  SimulateOptions so;
  so.out_dir = dir / "sim";
  const auto sim = run_simulate(doc, so);
  CHECK(sim.noiseless_chi == doctest::Approx(2.695).epsilon(1e-3));

  // Bit-exact reproducibility from (config, seed).
  so.out_dir = dir / "sim2";
  run_simulate(doc, so);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(read_text(dir / "sim" / stream_file_name(k)) == read_text(dir / "sim2" / stream_file_name(k)));

  AnalyzeOptions ao;
  ao.events_dir = dir / "sim";
  ao.out_dir = dir / "an";
  const auto an = run_analyze(doc, ao);
  CHECK(std::abs(an.chi - sim.noiseless_chi) <= 0.03);
  CHECK(an.trace.windows_used == 20);

  CertifyOptions co;
  co.chi_document = dir / "an" / "analysis.json";
  co.out = dir / "cert.json";
  const auto ce = run_certify(doc, co);
  CHECK(ce.converged);
  CHECK(ce.result.certified);
  CHECK(std::abs(ce.result.h_min_percent - 33.0) <= 2.0);

  ExtractOptions eo;
  eo.events_dir = dir / "sim";
  eo.certificate = dir / "cert.json";
  eo.out = dir / "bits.bin";
  const auto ex = run_extract(doc, eo);
  CHECK(ex.h_min_bits == ce.result.h_min_bits);
  CHECK(static_cast<long long>(ex.bits.size()) ==
        events::extraction_length(ex.events, ex.h_min_bits, doc.run.eps));
  CHECK(fs::file_size(dir / "bits.bin") == (ex.bits.size() + 7) / 8);
  eo.out = dir / "bits2.bin";
  run_extract(doc, eo);
  CHECK(read_text(dir / "bits.bin") == read_text(dir / "bits2.bin"));

  const auto summary = run_report({dir / "cert.json", dir / "bits.bin.json"}, dir / "report");
  CHECK(summary.find("extracted") != std::string::npos);
}

TEST_CASE("classical regime reports no certified entropy") {
  const auto dir = scratch("classical");
  const auto doc = ChipDocument::characterized();
  CertifyOptions co;
  co.chi = 2.05;
  co.e_chi = 0.092;
  co.e_p = 0.02;
  co.out = dir / "cert.json";
  const auto ce = run_certify(doc, co);
  CHECK_FALSE(ce.result.certified);
  CHECK(ce.result.h_min_bits == 0.0);
  const auto summary = run_report({dir / "cert.json"}, dir / "report");
  CHECK(summary.find("no certified entropy") != std::string::npos);

  ExtractOptions eo;
  eo.certificate = dir / "cert.json";
  eo.events_dir = dir;
  eo.out = dir / "bits.bin";
  CHECK_THROWS_AS(run_extract(doc, eo), InputError);
}

TEST_CASE("bell scan from event files") {
  const auto dir = scratch("scan");
  auto doc = ChipDocument::ideal();
  doc.run.phi_range = {-0.5, 0.5, 0.25};
  doc.run.theta_range = {-0.5, 0.0, 0.25};
  doc.run.duration_s = 0.4;
  SimulateOptions so;
  so.grid = true;
  so.out_dir = dir / "grid";
  const auto sim = run_simulate(doc, so);
  CHECK(sim.files.size() == 15);

  BellScanOptions bo;
  bo.events_dir = dir / "grid";
  bo.out_dir = dir / "scan";
  const auto scan = run_bell_scan(doc, bo);
  CHECK(scan.grid.rows() == 5);
  CHECK(scan.grid.cols() == 3);
  CHECK(fs::exists(dir / "scan" / "grid.tsv"));
  CHECK(fs::exists(dir / "scan" / "chi.json"));
  const auto g = grid_from_tsv(read_text(dir / "scan" / "grid.tsv"));
  CHECK(g.E == scan.grid.E);

  bo.events_dir.reset();
  bo.noiseless = true;
  bo.out_dir = dir / "model";
  const auto model = run_bell_scan(doc, bo);
  for (std::size_t k = 0; k < g.E.size(); ++k) CHECK(std::abs(*g.E[k] - *model.grid.E[k]) <= 0.05);
  CHECK(std::abs(scan.search.max.chi - model.search.max.chi) <= 0.1);
}

#pragma once

// Subcommand workflows. Each reads its inputs, runs the library kernels and
// writes its outputs atomically; the CLI is a thin wrapper over these.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "peqrng/app/calibration.hpp"
#include "peqrng/app/config.hpp"
#include "peqrng/bell.hpp"
#include "peqrng/bits.hpp"
#include "peqrng/certify.hpp"
#include "peqrng/events.hpp"

namespace peqrng::app {

namespace fs = std::filesystem;

// Command-line overrides of the document's run section and seed.
struct RunOverrides {
  std::optional<double> rate_hz;
  std::optional<double> duration_s;
  std::optional<double> bin_us;
  std::optional<double> window_ms;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;

  void apply(ChipDocument& doc) const;
};

// Parses "a,b,c,d" into four angles.
std::array<double, 4> parse_angles(const std::string& text);

// File name of stream k of a CHSH quadruple.
std::string stream_file_name(std::size_t k);

struct SimulateOptions {
  std::string which = "plus";                   // error case / default angles
  std::optional<std::array<double, 4>> angles;  // overrides the case angles
  bool grid = false;                            // one stream per scan-grid cell instead
  fs::path out_dir;
  Exec exec = Exec::parallel;
};

struct SimulateResult {
  std::vector<fs::path> files;
  std::vector<chip::OutcomeDistribution> distributions;
  double noiseless_chi = 0.0;  // CHSH mode only
};

// Noiseless outcome distributions for the four CHSH angle pairs.
std::array<chip::OutcomeDistribution, 4> chsh_distributions(const ChipDocument& doc, const std::string& which,
                                                            const std::array<double, 4>& angles,
                                                            Exec exec = Exec::parallel);

events::ChshStreams simulate_chsh(const ChipDocument& doc, const std::string& which,
                                  const std::array<double, 4>& angles, std::uint64_t seed,
                                  Exec exec = Exec::parallel);

SimulateResult run_simulate(const ChipDocument& doc, const SimulateOptions& opt);

struct BellScanOptions {
  std::optional<fs::path> events_dir;  // measured streams; otherwise simulate in memory
  bool noiseless = false;              // model surface instead of Monte Carlo
  std::string which = "plus";
  fs::path out_dir;
  Exec exec = Exec::parallel;
};

struct BellScanResult {
  bell::CorrelationGrid grid;
  bell::ChiSearch search;
};

// E from resolved outcomes (nullopt without outcomes) and its standard error
// over subintervals (nullopt with fewer than two usable subintervals).
std::pair<std::optional<double>, std::optional<double>> correlation_from_stream(const events::EventStream& s,
                                                                 double subinterval_s, std::uint64_t tie_seed);

BellScanResult run_bell_scan(const ChipDocument& doc, const BellScanOptions& opt);

struct CertifyOptions {
  std::optional<double> chi;             // explicit chi_real
  std::optional<fs::path> chi_document;  // chi.json or analysis.json
  std::string which = "plus";
  std::optional<double> e_chi;  // precomputed corrections
  std::optional<double> e_p;
  optimize::MultiStartOptions optimizer{};
  std::optional<fs::path> out;
  Exec exec = Exec::parallel;
};

struct CertifyResult {
  certify::CertificationResult result;
  std::optional<optimize::OptimizeResult> e_chi_run;
  std::optional<optimize::OptimizeResult> e_p_run;
  double certified_rate_hz = 0.0;
  bool converged = true;
};

CertifyResult run_certify(const ChipDocument& doc, const CertifyOptions& opt);

struct AnalyzeOptions {
  fs::path events_dir;
  std::uint64_t tie_seed = 0;
  events::TieMode tie_mode = events::TieMode::firing_channels;
  fs::path out_dir;
};

struct AnalyzeResult {
  events::WindowedTrace trace;
  double chi = 0.0;  // from the full streams
  double chi_stderr = 0.0;
  std::array<double, 4> angles{};
};

AnalyzeResult run_analyze(const ChipDocument& doc, const AnalyzeOptions& opt);

struct ExtractOptions {
  fs::path events_dir;
  std::optional<double> h_min_bits;
  std::optional<fs::path> certificate;  // certification.json supplying h_min_bits
  std::uint64_t tie_seed = 0;
  std::optional<std::uint64_t> seed;  // Toeplitz seed; defaults to the document seed
  fs::path out;                       // extracted bytes; a .json sidecar is written next to it
  Exec exec = Exec::parallel;
};

struct ExtractResult {
  std::size_t events = 0;
  double h_min_bits = 0.0;
  events::BitString bits;
};

ExtractResult run_extract(const ChipDocument& doc, const ExtractOptions& opt);

CalibrationFit run_calibrate(const fs::path& samples, int port, const fs::path& out);

// Writes summary.txt plus CSV plot data for every input document.
std::string run_report(const std::vector<fs::path>& inputs, const fs::path& out_dir);

}  // namespace peqrng::app

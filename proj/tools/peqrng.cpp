// peqrng command-line front end.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "peqrng/app/workflows.hpp"
#include "peqrng/error.hpp"

using namespace peqrng;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int fail(const std::string& sub, const char* kind, const std::string& msg, int code) {
  nlohmann::json j = {{"error", {{"subcommand", sub}, {"kind", kind}, {"message", msg}, {"exit_code", code}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Simulation and certification toolkit for a path-entangled single-photon QRNG chip"};
  cli.require_subcommand(1);

  std::string config = "characterized_chip.json";
  app::RunOverrides over;
  std::string out;
  std::string angles;
  std::string which = "plus";
  double window_ms = 0.0;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config, "Chip config (searched in $PEQRNG_CONFIG_DIR if not found)");
    s->add_option("--seed", over.seed, "Master seed (overrides the config)");
    s->add_option("--rate-hz", over.rate_hz, "Mean photon rate");
    s->add_option("--duration-s", over.duration_s, "Acquisition length per stream");
    s->add_option("--bin-us", over.bin_us, "Time-bin width");
    s->add_option("--eps", over.eps, "Extractor security parameter");
    s->add_option("--case", which, "Error case from the config")->check(CLI::IsMember({"plus", "minus"}));
  };

  auto* sim = cli.add_subcommand("simulate", "Simulate detection-event streams");
  common(sim);
  bool grid = false;
  sim->add_option("--angles", angles, "phi,phi',theta,theta' in rad");
  sim->add_flag("--grid", grid, "One stream per scan-grid cell");
  sim->add_option("--out", out, "Output directory")->required();

  auto* scan = cli.add_subcommand("bell-scan", "Correlation grid and best CHSH combination");
  common(scan);
  std::string events_dir;
  bool noiseless = false;
  scan->add_option("--events", events_dir, "Directory of event files (default: simulate)");
  scan->add_flag("--noiseless", noiseless, "Use the model surface instead of Monte Carlo");
  scan->add_option("--out", out, "Output directory")->required();

  auto* cert = cli.add_subcommand("certify", "Correction terms, guessing probability and min-entropy");
  common(cert);
  std::optional<double> chi, e_chi, e_p;
  std::string chi_doc;
  int starts = 64;
  cert->add_option("--chi", chi, "Measured chi");
  cert->add_option("--chi-doc", chi_doc, "chi.json or analysis.json");
  cert->add_option("--e-chi", e_chi, "Precomputed e_chi");
  cert->add_option("--e-p", e_p, "Precomputed e_p");
  cert->add_option("--starts", starts, "Minimum optimizer starts")->check(CLI::PositiveNumber);
  cert->add_option("--out", out, "Output JSON")->required();

  auto* ana = cli.add_subcommand("analyze", "Windowed traces of a CHSH quadruple");
  common(ana);
  bool all_four = false;
  ana->add_option("--events", events_dir, "Directory with stream_0..3.tsv")->required();
  ana->add_option("--window-ms", window_ms, "Window length")->check(CLI::PositiveNumber);
  ana->add_flag("--tie-all-four", all_four, "Resolve multi-click bins among all four channels");
  ana->add_option("--out", out, "Output directory")->required();

  auto* ext = cli.add_subcommand("extract", "Toeplitz extraction of certified bits");
  common(ext);
  std::optional<double> h_min;
  std::string certificate;
  ext->add_option("--events", events_dir, "Directory of event files")->required();
  ext->add_option("--h-min", h_min, "Min-entropy per event in bits");
  ext->add_option("--certificate", certificate, "certification.json");
  ext->add_option("--out", out, "Output bit file")->required();

  auto* cal = cli.add_subcommand("calibrate", "Fit the phase-power relation of an MZI");
  std::string samples;
  int port = 1;
  cal->add_option("--samples", samples, "power<TAB>intensity file")->required();
  cal->add_option("--port", port, "Output port")->check(CLI::IsMember({1, 2}));
  cal->add_option("--out", out, "Output JSON")->required();

  auto* rep = cli.add_subcommand("report", "Summary and plot data for result documents");
  std::vector<std::string> inputs;
  rep->add_option("inputs", inputs, "Documents to summarize")->required();
  rep->add_option("--out", out, "Output directory")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("", "usage", e.what(), kExitValidation);
  }

  const std::string sub = cli.get_subcommands().front()->get_name();
  try {
    auto load = [&] {
      auto doc = app::load_chip_document(app::resolve_config_path(config));
      over.apply(doc);
      if (window_ms > 0.0) doc.run.window_ms = window_ms;
      return doc;
    };
    if (sub == "simulate") {
      app::SimulateOptions o;
      o.which = which;
      if (!angles.empty()) o.angles = app::parse_angles(angles);
      o.grid = grid;
      o.out_dir = out;
      const auto r = app::run_simulate(load(), o);
      std::printf("wrote %zu event files to %s\n", r.files.size(), out.c_str());
      if (!grid) std::printf("noiseless chi %.6f\n", r.noiseless_chi);
    } else if (sub == "bell-scan") {
      app::BellScanOptions o;
      if (!events_dir.empty()) o.events_dir = fs::path(events_dir);
      o.noiseless = noiseless;
      o.which = which;
      o.out_dir = out;
      const auto r = app::run_bell_scan(load(), o);
      std::printf("chi max %.4f  chi min %.4f  (%llu combinations)\n", r.search.max.chi, r.search.min.chi,
                  static_cast<unsigned long long>(r.search.evaluations));
    } else if (sub == "certify") {
      app::CertifyOptions o;
      o.chi = chi;
      if (!chi_doc.empty()) o.chi_document = fs::path(chi_doc);
      o.which = which;
      o.e_chi = e_chi;
      o.e_p = e_p;
      const auto doc = load();
      o.optimizer.seed = doc.seed;
      o.optimizer.min_starts = starts;
      o.optimizer.max_starts = std::max(starts * 16, 1024);
      o.out = fs::path(out);
      const auto r = app::run_certify(doc, o);
      std::printf("p_guess %.4f  h_min %.4f bits (%.1f%%)%s\n", r.result.p_guess, r.result.h_min_bits,
                  r.result.h_min_percent, r.result.certified ? "" : "  no certified entropy");
      if (!r.converged)
        return fail(sub, "non-convergence", "optimizer did not stabilize; result written but flagged", kExitNumerical);
    } else if (sub == "analyze") {
      app::AnalyzeOptions o;
      o.events_dir = events_dir;
      o.tie_mode = all_four ? events::TieMode::all_four : events::TieMode::firing_channels;
      o.out_dir = out;
      auto doc = load();
      o.tie_seed = doc.seed;
      const auto r = app::run_analyze(doc, o);
      std::printf("chi %.4f +- %.4f, windowed mean %.4f [%.4f, %.4f]\n", r.chi, r.chi_stderr, r.trace.mean_chi,
                  r.trace.ci_low, r.trace.ci_high);
    } else if (sub == "extract") {
      app::ExtractOptions o;
      o.events_dir = events_dir;
      o.h_min_bits = h_min;
      if (!certificate.empty()) o.certificate = fs::path(certificate);
      o.out = out;
      auto doc = load();
      o.tie_seed = doc.seed;
      const auto r = app::run_extract(doc, o);
      std::printf("extracted %zu bits from %zu events\n", r.bits.size(), r.events);
    } else if (sub == "calibrate") {
      const auto f = app::run_calibrate(samples, port, out);
      std::printf("a %.6g  b %.6g  c %.6g  d %.6g  rms %.3g\n", f.a, f.b, f.c, f.d, f.rms);
    } else if (sub == "report") {
      std::vector<fs::path> in(inputs.begin(), inputs.end());
      std::fputs(app::run_report(in, out).c_str(), stdout);
    }
  } catch (const FitError& e) {
    return fail(sub, "fit", e.what(), kExitNumerical);
  } catch (const ConvergenceError& e) {
    return fail(sub, "non-convergence", e.what(), kExitNumerical);
  } catch (const InputError& e) {
    return fail(sub, "validation", e.what(), kExitValidation);
  } catch (const std::exception& e) {
    return fail(sub, "internal", e.what(), 1);
  }
  return kExitOk;
}

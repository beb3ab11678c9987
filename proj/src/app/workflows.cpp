#include "peqrng/app/workflows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "peqrng/app/formats.hpp"
#include "peqrng/error.hpp"

namespace peqrng::app {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    throw InputError(p.string() + ": not valid JSON: " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

chip::RotationSetting rotation_for(const ChipDocument& doc, const std::string& which, double phi, double theta) {
  if (!doc.simulate_with_errors) return chip::RotationSetting::from_angles(phi, theta);
  const auto& e = doc.error_case(which).errors;
  return chip::RotationSetting::from_angles(phi, theta, e.dphi, e.dtheta);
}

std::array<double, 4> case_angles(const ChipDocument& doc, const std::string& which,
                                  const std::optional<std::array<double, 4>>& explicit_angles) {
  if (explicit_angles) return *explicit_angles;
  const auto& c = doc.error_case(which);
  if (!c.angles) throw InputError("no angles given and the config has none for case '" + which + "'");
  return *c.angles;
}

// (phi, theta) of stream k in ChshStreams order.
std::pair<double, double> pair_angles(const std::array<double, 4>& a, std::size_t k) {
  return {a[k < 2 ? 0 : 1], a[k % 2 == 0 ? 2 : 3]};
}

std::vector<fs::path> tsv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".tsv") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw InputError("no .tsv event files in " + dir.string());
  return out;
}

events::ChshStreams read_chsh(const fs::path& dir) {
  events::ChshStreams s;
  for (std::size_t k = 0; k < 4; ++k) s[k] = read_events(dir / stream_file_name(k));
  return s;
}

json chi_json(const bell::ChiResult& r) {
  return {{"chi", r.chi}, {"angles", r.angles}, {"stderr", r.std_error}, {"minus_term", r.minus_term}};
}

std::string opt_str(const std::optional<double>& v, const char* f = "%.6g") { return v ? fmt(f, *v) : "NA"; }

}  // namespace

void RunOverrides::apply(ChipDocument& doc) const {
  if (rate_hz) doc.run.rate_hz = *rate_hz;
  if (duration_s) doc.run.duration_s = *duration_s;
  if (bin_us) doc.run.bin_us = *bin_us;
  if (window_ms) doc.run.window_ms = *window_ms;
  if (eps) doc.run.eps = *eps;
  if (seed) doc.seed = *seed;
  doc.run.validate();
}

std::array<double, 4> parse_angles(const std::string& text) {
  std::array<double, 4> a{};
  std::size_t k = 0;
  std::string_view rest = text;
  for (; k < 4; ++k) {
    const auto comma = rest.find(',');
    if ((comma == std::string_view::npos) != (k == 3)) throw InputError("--angles needs exactly four comma-separated values");
    a[k] = parse_double(rest.substr(0, comma), "angle");
    if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
  }
  return a;
}

std::string stream_file_name(std::size_t k) { return "stream_" + std::to_string(k) + ".tsv"; }

std::array<chip::OutcomeDistribution, 4> chsh_distributions(const ChipDocument& doc, const std::string& which,
                                                            const std::array<double, 4>& angles, Exec exec) {
  const auto cfg = doc.chip_config();
  std::array<chip::OutcomeDistribution, 4> d;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [phi, theta] = pair_angles(angles, k);
    d[k] = chip::broadband_probabilities(cfg, rotation_for(doc, which, phi, theta), exec);
  }
  return d;
}

events::ChshStreams simulate_chsh(const ChipDocument& doc, const std::string& which,
                                  const std::array<double, 4>& angles, std::uint64_t seed, Exec exec) {
  const auto d = chsh_distributions(doc, which, angles, exec);
  auto streams = events::simulate_streams(d, doc.run.rate_hz, doc.run.duration_s, doc.run.bin_us, seed, exec);
  events::ChshStreams out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = std::move(streams[k]);
    std::tie(out[k].meta.phi_rad, out[k].meta.theta_rad) = pair_angles(angles, k);
  }
  return out;
}

SimulateResult run_simulate(const ChipDocument& doc, const SimulateOptions& opt) {
  doc.validate();
  SimulateResult res;
  if (!opt.grid) {
    const auto angles = case_angles(doc, opt.which, opt.angles);
    const auto d = chsh_distributions(doc, opt.which, angles, opt.exec);
    res.distributions.assign(d.begin(), d.end());
    res.noiseless_chi = bell::chi_from_distributions(d);
    const auto streams = simulate_chsh(doc, opt.which, angles, doc.seed, opt.exec);
    for (std::size_t k = 0; k < 4; ++k) {
      res.files.push_back(opt.out_dir / stream_file_name(k));
      write_events(streams[k], res.files.back());
    }
    return res;
  }
  const auto phis = bell::angle_range(doc.run.phi_range[0], doc.run.phi_range[1], doc.run.phi_range[2]);
  const auto thetas = bell::angle_range(doc.run.theta_range[0], doc.run.theta_range[1], doc.run.theta_range[2]);
  const auto cfg = doc.chip_config();
  for (std::size_t i = 0; i < phis.size(); ++i)
    for (std::size_t j = 0; j < thetas.size(); ++j)
      res.distributions.push_back(
          chip::broadband_probabilities(cfg, rotation_for(doc, opt.which, phis[i], thetas[j]), Exec::serial));
  auto streams = events::simulate_streams(res.distributions, doc.run.rate_hz, doc.run.duration_s, doc.run.bin_us,
                                          doc.seed, opt.exec);
  for (std::size_t i = 0; i < phis.size(); ++i)
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      auto& s = streams[i * thetas.size() + j];
      s.meta.phi_rad = phis[i];
      s.meta.theta_rad = thetas[j];
      char name[64];
      std::snprintf(name, sizeof name, "cell_%03zu_%03zu.tsv", i, j);
      res.files.push_back(opt.out_dir / name);
      write_events(s, res.files.back());
    }
  return res;
}

std::pair<std::optional<double>, std::optional<double>> correlation_from_stream(const events::EventStream& s,
                                                                                 double subinterval_s,
                                                                                 std::uint64_t tie_seed) {
  const auto outcomes = events::bin_and_resolve(s, tie_seed);
  if (outcomes.empty()) return {std::nullopt, std::nullopt};
  const double e = bell::correlation_coefficient(events::estimate_probabilities(outcomes));
  std::optional<double> se;
  if (s.meta.duration_s >= 2.0 * subinterval_s - 1e-9) {
    std::vector<double> per;
    for (const auto& d : events::window_distributions(outcomes, s.meta.duration_s, subinterval_s))
      if (d) per.push_back(bell::correlation_coefficient(*d));
    if (per.size() >= 2) se = bell::standard_error(per);
  }
  return {e, se};
}

BellScanResult run_bell_scan(const ChipDocument& doc, const BellScanOptions& opt) {
  doc.validate();
  BellScanResult res;
  const double sub = doc.run.subinterval_s;
  if (opt.events_dir) {
    const auto files = tsv_files(*opt.events_dir);
    std::vector<events::EventStream> streams;
    std::vector<double> phis, thetas;
    for (const auto& f : files) {
      streams.push_back(read_events(f));
      phis.push_back(streams.back().meta.phi_rad);
      thetas.push_back(streams.back().meta.theta_rad);
    }
    auto uniq = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    res.grid = bell::CorrelationGrid(uniq(phis), uniq(thetas));
    res.grid.std_errors.resize(res.grid.E.size());
    for (std::size_t k = 0; k < streams.size(); ++k) {
      const auto i = static_cast<std::size_t>(
          std::lower_bound(res.grid.phi_values.begin(), res.grid.phi_values.end(), phis[k]) - res.grid.phi_values.begin());
      const auto j = static_cast<std::size_t>(std::lower_bound(res.grid.theta_values.begin(), res.grid.theta_values.end(),
                                                               thetas[k]) -
                                              res.grid.theta_values.begin());
      if (res.grid.at(i, j)) throw InputError("two event files share the angle pair of " + files[k].string());
      const auto [e, se] = correlation_from_stream(streams[k], sub, derive_seed(doc.seed, k));
      res.grid.at(i, j) = e;
      res.grid.std_errors[i * res.grid.cols() + j] = se;
    }
  } else {
    const auto phis = bell::angle_range(doc.run.phi_range[0], doc.run.phi_range[1], doc.run.phi_range[2]);
    const auto thetas = bell::angle_range(doc.run.theta_range[0], doc.run.theta_range[1], doc.run.theta_range[2]);
    const auto cfg = doc.chip_config();
    if (opt.noiseless) {
      chip::PhaseErrors dp{}, dt{};
      if (doc.simulate_with_errors) {
        dp = doc.error_case(opt.which).errors.dphi;
        dt = doc.error_case(opt.which).errors.dtheta;
      }
      res.grid = bell::simulate_correlation_grid(cfg, phis, thetas, dp, dt, opt.exec);
    } else {
      res.grid = bell::CorrelationGrid(phis, thetas);
      res.grid.std_errors.resize(res.grid.E.size());
      const long cells = static_cast<long>(res.grid.E.size());
      auto cell = [&](long c) {
        const auto u = static_cast<std::size_t>(c);
        const double phi = phis[u / thetas.size()];
        const double theta = thetas[u % thetas.size()];
        const auto d = chip::broadband_probabilities(cfg, rotation_for(doc, opt.which, phi, theta), Exec::serial);
        auto s = events::simulate_events(d, doc.run.rate_hz, doc.run.duration_s, doc.run.bin_us,
                                         derive_seed(doc.seed, u));
        const auto [e, se] = correlation_from_stream(s, sub, derive_seed(~doc.seed, u));
        res.grid.E[u] = e;
        res.grid.std_errors[u] = se;
      };
      if (opt.exec == Exec::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
        for (long c = 0; c < cells; ++c) {
          try {
            cell(c);
          } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
          }
        }
        if (failure) std::rethrow_exception(failure);
      } else {
        for (long c = 0; c < cells; ++c) cell(c);
      }
    }
  }
  res.search = bell::best_combination_search(res.grid, opt.exec);
  if (!opt.out_dir.empty()) {
    write_atomic(opt.out_dir / "grid.tsv", grid_to_tsv(res.grid));
    write_json(opt.out_dir / "chi.json", {{"format", "peqrng-chi"},
                                          {"version", 1},
                                          {"max", chi_json(res.search.max)},
                                          {"min", chi_json(res.search.min)},
                                          {"evaluations", res.search.evaluations},
                                          {"grid", "grid.tsv"}});
  }
  return res;
}

CertifyResult run_certify(const ChipDocument& doc, const CertifyOptions& opt) {
  doc.validate();
  double chi = 0.0;
  if (opt.chi) {
    chi = *opt.chi;
  } else if (opt.chi_document) {
    const json j = read_json(*opt.chi_document);
    const std::string f = j.value("format", "");
    try {
      if (f == "peqrng-chi")
        chi = j.at(opt.which == "minus" ? "min" : "max").at("chi").get<double>();
      else if (f == "peqrng-analysis")
        chi = j.at("chi").get<double>();
      else
        throw InputError(opt.chi_document->string() + ": expected a peqrng-chi or peqrng-analysis document");
    } catch (const json::exception& e) {
      throw InputError(opt.chi_document->string() + ": " + e.what());
    }
  } else {
    throw InputError("certify needs --chi or a chi/analysis document");
  }
  if (!std::isfinite(chi)) throw InputError("chi must be finite");

  CertifyResult res;
  const auto& errors = doc.error_case(opt.which).errors;
  const auto mmis = doc.chip_config().mzi_mmis;
  double ec = 0.0, ep = 0.0;
  if (opt.e_chi) {
    ec = *opt.e_chi;
  } else {
    res.e_chi_run = certify::e_chi(errors, mmis, opt.optimizer, opt.exec);
    ec = res.e_chi_run->value;
    res.converged = res.converged && res.e_chi_run->converged;
  }
  if (opt.e_p) {
    ep = *opt.e_p;
  } else {
    res.e_p_run = certify::e_p(errors, mmis, opt.optimizer, opt.exec);
    ep = res.e_p_run->value;
    res.converged = res.converged && res.e_p_run->converged;
  }
  res.result = certify::certify(chi, ec, ep);
  res.certified_rate_hz = certify::certified_rate(doc.run.rate_hz, res.result.h_min_bits);

  if (opt.out) {
    auto run_json = [&](const std::optional<optimize::OptimizeResult>& r) -> json {
      if (!r) return "precomputed";
      return {{"value", r->value},         {"starts", r->starts},         {"evaluations", r->evaluations},
              {"converged", r->converged}, {"probe_best", r->probe_best}, {"argmax", r->argmax}};
    };
    const auto& c = res.result;
    write_json(*opt.out, {{"format", "peqrng-certification"},
                          {"version", 1},
                          {"case", opt.which},
                          {"chi_real", c.chi_real},
                          {"e_chi", c.e_chi},
                          {"e_p", c.e_p},
                          {"p_guess", c.p_guess},
                          {"h_min_bits", c.h_min_bits},
                          {"h_min_percent", c.h_min_percent},
                          {"certified", c.certified},
                          {"event_rate_hz", doc.run.rate_hz},
                          {"certified_rate_hz", res.certified_rate_hz},
                          {"optimizer",
                           {{"seed", opt.optimizer.seed},
                            {"min_starts", opt.optimizer.min_starts},
                            {"max_starts", opt.optimizer.max_starts},
                            {"final_step", opt.optimizer.final_step},
                            {"verification_probes", opt.optimizer.verification_probes},
                            {"converged", res.converged},
                            {"e_chi", run_json(res.e_chi_run)},
                            {"e_p", run_json(res.e_p_run)}}}});
  }
  return res;
}

AnalyzeResult run_analyze(const ChipDocument& doc, const AnalyzeOptions& opt) {
  const auto streams = read_chsh(opt.events_dir);
  AnalyzeResult res;
  res.angles = {streams[0].meta.phi_rad, streams[2].meta.phi_rad, streams[0].meta.theta_rad, streams[1].meta.theta_rad};
  res.trace = events::windowed_traces(streams, doc.run.window_ms / 1000.0, 0.99, opt.tie_seed, opt.tie_mode);
  std::array<chip::OutcomeDistribution, 4> full;
  for (std::size_t k = 0; k < 4; ++k)
    full[k] = events::estimate_probabilities(
        events::bin_and_resolve(streams[k], derive_seed(opt.tie_seed, k), opt.tie_mode));
  res.chi = bell::chi_from_distributions(full);
  res.chi_stderr = bell::chi_stderr(streams, doc.run.subinterval_s, opt.tie_seed, opt.tie_mode);

  if (!opt.out_dir.empty()) {
    std::string csv = "window,t_start_s";
    for (int k = 0; k < 4; ++k)
      for (const char* c : {"P_UF", "P_UN", "P_DF", "P_DN", "E"}) csv += std::string(",") + c + "_" + std::to_string(k);
    csv += ",chi\n";
    const auto& tr = res.trace;
    for (std::size_t w = 0; w < tr.probabilities.size(); ++w) {
      csv += std::to_string(w) + "," + format_double(static_cast<double>(w) * tr.window_s);
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& p = tr.probabilities[w][k];
        for (std::size_t c = 0; c < 4; ++c) csv += "," + (p ? format_double(p->p[c]) : std::string("NA"));
        csv += "," + (p ? format_double(bell::correlation_coefficient(*p)) : std::string("NA"));
      }
      csv += "," + (tr.chi[w] ? format_double(*tr.chi[w]) : std::string("NA")) + "\n";
    }
    write_atomic(opt.out_dir / "traces.csv", csv);
    write_json(opt.out_dir / "analysis.json", {{"format", "peqrng-analysis"},
                                               {"version", 1},
                                               {"angles", res.angles},
                                               {"chi", res.chi},
                                               {"chi_stderr", res.chi_stderr},
                                               {"subinterval_s", doc.run.subinterval_s},
                                               {"window_s", tr.window_s},
                                               {"windows", tr.probabilities.size()},
                                               {"windows_used", tr.windows_used},
                                               {"mean_chi", tr.mean_chi},
                                               {"stddev_chi", tr.stddev_chi},
                                               {"confidence", tr.confidence},
                                               {"ci_low", tr.ci_low},
                                               {"ci_high", tr.ci_high},
                                               {"traces", "traces.csv"}});
  }
  return res;
}

ExtractResult run_extract(const ChipDocument& doc, const ExtractOptions& opt) {
  ExtractResult res;
  if (opt.h_min_bits) {
    res.h_min_bits = *opt.h_min_bits;
  } else if (opt.certificate) {
    const json j = read_json(*opt.certificate);
    if (j.value("format", "") != "peqrng-certification")
      throw InputError(opt.certificate->string() + ": expected a peqrng-certification document");
    res.h_min_bits = j.at("h_min_bits").get<double>();
  } else {
    throw InputError("extract needs --h-min or --certificate");
  }
  if (!(res.h_min_bits > 0.0)) throw InputError("no certified entropy: h_min is zero");

  std::vector<qcore::Channel> channels;
  const auto files = tsv_files(opt.events_dir);
  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto outcomes = events::bin_and_resolve(read_events(files[k]), derive_seed(opt.tie_seed, k));
    for (const auto& o : outcomes) channels.push_back(o.channel);
  }
  res.events = channels.size();
  const std::uint64_t seed = opt.seed.value_or(doc.seed);
  res.bits = events::toeplitz_extract(events::raw_bits(channels), res.h_min_bits, doc.run.eps, seed, opt.exec);
  const auto bytes = res.bits.to_bytes();
  write_atomic(opt.out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  write_json(fs::path(opt.out.string() + ".json"), {{"format", "peqrng-extraction"},
                                                     {"version", 1},
                                                     {"events", res.events},
                                                     {"raw_bits", 2 * res.events},
                                                     {"h_min_bits", res.h_min_bits},
                                                     {"eps", doc.run.eps},
                                                     {"seed", seed},
                                                     {"output_bits", res.bits.size()},
                                                     {"ones", res.bits.count_ones()}});
  return res;
}

CalibrationFit run_calibrate(const fs::path& samples, int port, const fs::path& out) {
  const auto data = samples_from_tsv(read_text(samples));
  const auto fit = fit_mzi_calibration(data, port);
  double wmin = INFINITY, wmax = -INFINITY;
  for (const auto& [w, i] : data) {
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  write_json(out, {{"format", "peqrng-calibration"},
                   {"version", 1},
                   {"port", fit.port},
                   {"a", fit.a},
                   {"b", fit.b},
                   {"c", fit.c},
                   {"d", fit.d},
                   {"stderr", {{"a", fit.a_err}, {"b", fit.b_err}, {"c", fit.c_err}, {"d", fit.d_err}}},
                   {"rms", fit.rms},
                   {"samples", fit.samples},
                   {"power_range", {wmin, wmax}}});
  return fit;
}

std::string run_report(const std::vector<fs::path>& inputs, const fs::path& out_dir) {
  if (inputs.empty()) throw InputError("report needs at least one input");
  std::ostringstream sum;
  for (const auto& in : inputs) {
    const std::string stem = in.stem().string();
    const std::string text = read_text(in);
    sum << "== " << in.filename().string() << "\n";
    if (text.starts_with("#peqrng-grid")) {
      const auto g = grid_from_tsv(text);
      std::string csv = "phi_rad,theta_rad,E\n";
      std::size_t missing = 0;
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
          const auto& e = g.at(i, j);
          if (!e) ++missing;
          csv += format_double(g.phi_values[i]) + "," + format_double(g.theta_values[j]) + "," +
                 (e ? format_double(*e) : std::string("NA")) + "\n";
        }
      write_atomic(out_dir / (stem + "_e_surface.csv"), csv);
      sum << "correlation grid " << g.rows() << " x " << g.cols() << ", missing cells " << missing << "\n";
      continue;
    }
    if (text.starts_with("#peqrng-events")) {
      const auto s = events_from_tsv(text);
      std::array<std::size_t, 4> n{};
      for (const auto& r : s.records) ++n[qcore::index(r.channel)];
      sum << "event stream phi " << fmt("%.4f", s.meta.phi_rad) << " theta " << fmt("%.4f", s.meta.theta_rad)
          << ", records " << s.records.size() << " (UF " << n[0] << ", UN " << n[1] << ", DF " << n[2] << ", DN "
          << n[3] << ")\n";
      continue;
    }
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error&) {
      throw InputError(in.string() + ": unrecognized input (expected a peqrng TSV or JSON document)");
    }
    const std::string f = j.value("format", "");
    try {
      if (f == "peqrng-chi") {
        for (const char* key : {"max", "min"}) {
          const auto& r = j.at(key);
          const auto a = r.at("angles").get<std::array<double, 4>>();
          sum << "chi " << key << "  " << fmt("%.4f", r.at("chi").get<double>()) << " +- "
              << fmt("%.4f", r.at("stderr").get<double>()) << "  at (phi, phi', theta, theta') = (" << fmt("%.3f", a[0])
              << ", " << fmt("%.3f", a[1]) << ", " << fmt("%.3f", a[2]) << ", " << fmt("%.3f", a[3]) << ")\n";
        }
        std::string csv = "alpha_rad,chi\n";
        for (int k = 0; k <= 200; ++k) {
          const double a = std::numbers::pi / 2 * k / 200.0;
          csv += format_double(a) + "," + format_double(bell::chi_alpha_ideal(a)) + "\n";
        }
        write_atomic(out_dir / (stem + "_chi_alpha.csv"), csv);
      } else if (f == "peqrng-analysis") {
        sum << "chi " << fmt("%.4f", j.at("chi").get<double>()) << " +- " << fmt("%.4f", j.at("chi_stderr").get<double>())
            << " (stderr over " << fmt("%.3g", j.at("subinterval_s").get<double>()) << " s subintervals)\n";
        sum << "windowed mean chi " << fmt("%.4f", j.at("mean_chi").get<double>()) << ", "
            << fmt("%.0f", 100.0 * j.at("confidence").get<double>()) << "% interval ["
            << fmt("%.4f", j.at("ci_low").get<double>()) << ", " << fmt("%.4f", j.at("ci_high").get<double>())
            << "] over " << j.at("windows_used").get<std::size_t>() << " windows of "
            << fmt("%.0f", 1000.0 * j.at("window_s").get<double>()) << " ms\n";
      } else if (f == "peqrng-certification") {
        sum << "chi_real " << fmt("%.4f", j.at("chi_real").get<double>()) << ", e_chi "
            << fmt("%.4f", j.at("e_chi").get<double>()) << ", e_p " << fmt("%.4f", j.at("e_p").get<double>()) << "\n";
        sum << "p_guess " << fmt("%.4f", j.at("p_guess").get<double>()) << "\n";
        if (!j.at("certified").get<bool>()) {
          sum << "no certified entropy (|chi| - e_chi <= 2)\n";
        } else {
          sum << "h_min " << fmt("%.4f", j.at("h_min_bits").get<double>()) << " bits ("
              << fmt("%.1f", j.at("h_min_percent").get<double>()) << "%)\n";
          sum << "certified rate " << fmt("%.0f", j.at("certified_rate_hz").get<double>()) << " bit/s at "
              << fmt("%.0f", j.at("event_rate_hz").get<double>()) << " events/s\n";
        }
      } else if (f == "peqrng-calibration") {
        const CalibrationFit fit{j.at("port").get<int>(), j.at("a").get<double>(), j.at("b").get<double>(),
                                 j.at("c").get<double>(), j.at("d").get<double>()};
        sum << "calibration port " << fit.port << ": a " << fmt("%.6g", fit.a) << ", b " << fmt("%.6g", fit.b)
            << ", c " << fmt("%.6g", fit.c) << ", d " << fmt("%.6g", fit.d) << ", rms "
            << fmt("%.3g", j.at("rms").get<double>()) << "\n";
        const auto range = j.at("power_range").get<std::array<double, 2>>();
        std::string csv = "power,intensity_fit,phase_rad\n";
        for (int k = 0; k <= 200; ++k) {
          const double w = range[0] + (range[1] - range[0]) * k / 200.0;
          csv += format_double(w) + "," + format_double(fit.intensity(w)) + "," + format_double(fit.phase(w)) + "\n";
        }
        write_atomic(out_dir / (stem + "_fringe.csv"), csv);
      } else if (f == "peqrng-extraction") {
        sum << "extracted " << j.at("output_bits").get<std::size_t>() << " bits from " << j.at("events").get<std::size_t>()
            << " events at h_min " << fmt("%.4f", j.at("h_min_bits").get<double>()) << " bits, eps "
            << fmt("%.3g", j.at("eps").get<double>()) << "\n";
      } else if (f == kChipFormat) {
        const auto d = chip_document_from_json_text(text);
        sum << "chip '" << d.name << "': generation MMI T " << opt_str(d.generation_mmi.T, "%.3f") << " R "
            << opt_str(d.generation_mmi.R, "%.3f") << ", spectrum " << d.spectrum.kind << ", seed " << d.seed << "\n";
      } else {
        throw InputError(in.string() + ": unknown document format '" + f + "'");
      }
    } catch (const json::exception& e) {
      throw InputError(in.string() + ": " + e.what());
    }
  }
  const std::string s = sum.str();
  write_atomic(out_dir / "summary.txt", s);
  return s;
}

}  // namespace peqrng::app

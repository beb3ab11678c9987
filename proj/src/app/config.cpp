#include "peqrng/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include <json.hpp>

#include "peqrng/app/formats.hpp"
#include "peqrng/error.hpp"

namespace peqrng::app {

using nlohmann::json;

components::MmiParams MmiSpec::params() const {
  if (!table.empty()) return components::MmiParams::from_power_table(table);
  return components::MmiParams::from_power(T, R);
}

components::WavelengthSpectrum SpectrumSpec::spectrum() const {
  if (kind == "monochromatic") return components::WavelengthSpectrum::monochromatic(center_nm);
  if (kind == "gaussian") return components::WavelengthSpectrum::gaussian(lo_nm, hi_nm, count, fwhm_nm);
  if (kind == "table") {
    components::WavelengthSpectrum s{nodes};
    s.validate();
    return s;
  }
  throw InputError("spectrum kind must be monochromatic, gaussian or table");
}

void RunSpec::validate() const {
  if (!(rate_hz >= 0.0)) throw InputError("run.rate_hz must be >= 0");
  if (!(duration_s > 0.0) || !(bin_us > 0.0) || !(window_ms > 0.0) || !(subinterval_s > 0.0))
    throw InputError("run: durations and widths must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("run.eps must lie in (0, 1)");
  for (const auto* r : {&phi_range, &theta_range})
    if (!((*r)[2] > 0.0) || !((*r)[1] >= (*r)[0])) throw InputError("run: angle range needs lo <= hi and step > 0");
}

chip::ChipConfig ChipDocument::chip_config() const {
  chip::ChipConfig c;
  c.generation_mmi = generation_mmi.params();
  c.mzi_mmis = {phi_u.params(), phi_d.params(), theta_f.params(), theta_n.params()};
  c.generation.xi = xi_rad;
  c.loss = components::LossModel::aggregate(propagation_amplitude, {}, crossings, crossing_transmission);
  c.spectrum = spectrum.spectrum();
  c.phase_dispersion = phase_dispersion;
  c.design_wavelength_nm = design_wavelength_nm;
  c.xi_compensation = xi_compensation_rad;
  c.epsilon_max = epsilon_max_rad;
  return c;
}

const ErrorCase& ChipDocument::error_case(const std::string& which) const {
  if (which == "plus") return chi_plus;
  if (which == "minus") return chi_minus;
  throw InputError("error case must be 'plus' or 'minus'");
}

void ChipDocument::validate() const {
  chip_config().validate();
  chi_plus.errors.validate(epsilon_max_rad);
  chi_minus.errors.validate(epsilon_max_rad);
  run.validate();
}

ChipDocument ChipDocument::ideal() {
  ChipDocument d;
  d.name = "ideal";
  d.crossing_transmission = 1.0;
  d.spectrum.kind = "monochromatic";
  constexpr double q = std::numbers::pi / 8;
  d.chi_plus.angles = std::array<double, 4>{-q, q, 0.0, 2 * q};
  d.chi_minus.angles = std::array<double, 4>{3 * q, 5 * q, 0.0, 2 * q};
  return d;
}

ChipDocument ChipDocument::characterized() {
  ChipDocument d;
  d.name = "characterized";
  for (MmiSpec* m : {&d.generation_mmi, &d.phi_u, &d.phi_d, &d.theta_f, &d.theta_n}) *m = {0.4, 0.6, {}};
  d.crossings = 2;
  d.chi_plus = {certify::PhaseErrorSet::table1_chi_plus(), std::array<double, 4>{-0.576, -1.445, -1.11, -1.87}};
  d.chi_minus = {certify::PhaseErrorSet::table1_chi_minus(), std::array<double, 4>{-1.589, 0.863, -0.35, -1.27}};
  return d;
}

namespace {

void expect_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError("chip config: " + where + " must be an object");
  for (const auto& el : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), el.key()) == allowed.end())
      throw InputError("chip config: unknown key '" + el.key() + "' in " + where);
  }
}

json mmi_json(const MmiSpec& m) {
  if (m.table.empty()) return {{"T", m.T}, {"R", m.R}};
  json t = json::array();
  for (const auto& p : m.table) t.push_back({p.wavelength_nm, p.t, p.r});
  return {{"table", t}};
}

MmiSpec mmi_from(const json& j) {
  expect_keys(j, {"T", "R", "table"}, "mmi");
  MmiSpec m;
  if (j.contains("table")) {
    for (const auto& row : j.at("table")) {
      if (!row.is_array() || row.size() != 3) throw InputError("MMI table rows must be [wavelength_nm, T, R]");
      m.table.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    }
    if (m.table.empty()) throw InputError("MMI table is empty");
  } else {
    m.T = j.at("T").get<double>();
    m.R = j.at("R").get<double>();
  }
  return m;
}

json case_json(const ErrorCase& c) {
  json j = {{"dphi", c.errors.dphi}, {"dtheta", c.errors.dtheta}};
  if (c.angles) j["angles"] = *c.angles;
  return j;
}

ErrorCase case_from(const json& j) {
  expect_keys(j, {"dphi", "dtheta", "angles"}, "cases");
  ErrorCase c;
  c.errors.dphi = j.at("dphi").get<std::array<double, 4>>();
  c.errors.dtheta = j.at("dtheta").get<std::array<double, 4>>();
  if (j.contains("angles")) c.angles = j.at("angles").get<std::array<double, 4>>();
  return c;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_json_text(const ChipDocument& d) {
  json j;
  j["format"] = kChipFormat;
  j["version"] = kChipVersion;
  j["name"] = d.name;
  j["mmi"] = {{"generation", mmi_json(d.generation_mmi)}, {"phi_u", mmi_json(d.phi_u)},
              {"phi_d", mmi_json(d.phi_d)},           {"theta_f", mmi_json(d.theta_f)},
              {"theta_n", mmi_json(d.theta_n)}};
  j["generation"] = {{"xi_rad", d.xi_rad}};
  j["loss"] = {{"propagation_amplitude", d.propagation_amplitude},
               {"crossings", d.crossings},
               {"crossing_transmission", d.crossing_transmission}};
  json s = {{"kind", d.spectrum.kind}};
  if (d.spectrum.kind == "monochromatic") {
    s["center_nm"] = d.spectrum.center_nm;
  } else if (d.spectrum.kind == "gaussian") {
    s["lo_nm"] = d.spectrum.lo_nm;
    s["hi_nm"] = d.spectrum.hi_nm;
    s["count"] = d.spectrum.count;
    s["fwhm_nm"] = d.spectrum.fwhm_nm;
  } else {
    json nodes = json::array();
    for (const auto& n : d.spectrum.nodes) nodes.push_back({n.wavelength_nm, n.weight});
    s["nodes"] = nodes;
  }
  j["spectrum"] = s;
  j["phases"] = {{"dispersion", d.phase_dispersion},
                 {"design_wavelength_nm", d.design_wavelength_nm},
                 {"xi_compensation_rad", d.xi_compensation_rad},
                 {"epsilon_max_rad", d.epsilon_max_rad},
                 {"simulate_with_errors", d.simulate_with_errors}};
  j["cases"] = {{"plus", case_json(d.chi_plus)}, {"minus", case_json(d.chi_minus)}};
  j["seed"] = d.seed;
  j["run"] = {{"rate_hz", d.run.rate_hz},         {"duration_s", d.run.duration_s},
              {"bin_us", d.run.bin_us},           {"window_ms", d.run.window_ms},
              {"subinterval_s", d.run.subinterval_s}, {"eps", d.run.eps},
              {"phi_range", d.run.phi_range},     {"theta_range", d.run.theta_range}};
  return j.dump(2) + "\n";
}

ChipDocument chip_document_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("chip config is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kChipFormat) throw InputError("chip config: format must be \"peqrng-chip\"");
    if (j.value("version", 0) != kChipVersion) throw InputError("chip config: unsupported version");
    expect_keys(j, {"format", "version", "name", "mmi", "generation", "loss", "spectrum", "phases", "cases", "seed", "run"},
                "the document");
    ChipDocument d;
    read_opt(j, "name", d.name);
    const auto& m = j.at("mmi");
    expect_keys(m, {"generation", "phi_u", "phi_d", "theta_f", "theta_n"}, "mmi");
    d.generation_mmi = mmi_from(m.at("generation"));
    d.phi_u = mmi_from(m.at("phi_u"));
    d.phi_d = mmi_from(m.at("phi_d"));
    d.theta_f = mmi_from(m.at("theta_f"));
    d.theta_n = mmi_from(m.at("theta_n"));
    if (j.contains("generation")) expect_keys(j.at("generation"), {"xi_rad"}, "generation");
    if (j.contains("generation")) read_opt(j.at("generation"), "xi_rad", d.xi_rad);
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      expect_keys(l, {"propagation_amplitude", "crossings", "crossing_transmission"}, "loss");
      read_opt(l, "propagation_amplitude", d.propagation_amplitude);
      read_opt(l, "crossings", d.crossings);
      read_opt(l, "crossing_transmission", d.crossing_transmission);
    }
    if (j.contains("spectrum")) {
      const auto& s = j.at("spectrum");
      expect_keys(s, {"kind", "center_nm", "lo_nm", "hi_nm", "count", "fwhm_nm", "nodes"}, "spectrum");
      d.spectrum.kind = s.at("kind").get<std::string>();
      read_opt(s, "center_nm", d.spectrum.center_nm);
      read_opt(s, "lo_nm", d.spectrum.lo_nm);
      read_opt(s, "hi_nm", d.spectrum.hi_nm);
      read_opt(s, "count", d.spectrum.count);
      read_opt(s, "fwhm_nm", d.spectrum.fwhm_nm);
      if (s.contains("nodes"))
        for (const auto& n : s.at("nodes")) d.spectrum.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
    }
    if (j.contains("phases")) {
      const auto& p = j.at("phases");
      expect_keys(p, {"dispersion", "design_wavelength_nm", "xi_compensation_rad", "epsilon_max_rad", "simulate_with_errors"},
                  "phases");
      read_opt(p, "dispersion", d.phase_dispersion);
      read_opt(p, "design_wavelength_nm", d.design_wavelength_nm);
      read_opt(p, "xi_compensation_rad", d.xi_compensation_rad);
      read_opt(p, "epsilon_max_rad", d.epsilon_max_rad);
      read_opt(p, "simulate_with_errors", d.simulate_with_errors);
    }
    if (j.contains("cases")) {
      const auto& c = j.at("cases");
      expect_keys(c, {"plus", "minus"}, "cases");
      if (c.contains("plus")) d.chi_plus = case_from(c.at("plus"));
      if (c.contains("minus")) d.chi_minus = case_from(c.at("minus"));
    }
    read_opt(j, "seed", d.seed);
    if (j.contains("run")) {
      const auto& r = j.at("run");
      expect_keys(r, {"rate_hz", "duration_s", "bin_us", "window_ms", "subinterval_s", "eps", "phi_range", "theta_range"},
                  "run");
      read_opt(r, "rate_hz", d.run.rate_hz);
      read_opt(r, "duration_s", d.run.duration_s);
      read_opt(r, "bin_us", d.run.bin_us);
      read_opt(r, "window_ms", d.run.window_ms);
      read_opt(r, "subinterval_s", d.run.subinterval_s);
      read_opt(r, "eps", d.run.eps);
      read_opt(r, "phi_range", d.run.phi_range);
      read_opt(r, "theta_range", d.run.theta_range);
    }
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw InputError(std::string("chip config: ") + e.what());
  }
}

ChipDocument load_chip_document(const std::filesystem::path& path) {
  return chip_document_from_json_text(read_text(path));
}

void save_chip_document(const ChipDocument& doc, const std::filesystem::path& path) {
  write_atomic(path, to_json_text(doc));
}

std::filesystem::path resolve_config_path(const std::string& arg) {
  namespace fs = std::filesystem;
  const fs::path p(arg);
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("PEQRNG_CONFIG_DIR"); dir && *dir && p.is_relative()) {
    const fs::path q = fs::path(dir) / p;
    if (fs::exists(q)) return q;
  }
  throw InputError("config file not found: " + arg);
}

}  // namespace peqrng::app

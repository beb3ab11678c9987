#include "peqrng/app/formats.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "peqrng/error.hpp"

namespace peqrng::app {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

namespace {

// Splits into lines, dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto t = line.find('\t');
    out.push_back(line.substr(0, t));
    if (t == std::string_view::npos) break;
    line.remove_prefix(t + 1);
  }
  return out;
}

}  // namespace

std::string events_to_tsv(const events::EventStream& s) {
  std::string out = "#peqrng-events v1\n";
  const auto& m = s.meta;
  out += "# phi_rad=" + format_double(m.phi_rad) + "\n";
  out += "# theta_rad=" + format_double(m.theta_rad) + "\n";
  out += "# rate_hz=" + format_double(m.rate_hz) + "\n";
  out += "# duration_s=" + format_double(m.duration_s) + "\n";
  out += "# bin_width_us=" + format_double(m.bin_width_us) + "\n";
  out += "# seed=" + std::to_string(m.seed) + "\n";
  out += "timestamp_ns\tchannel\n";
  out.reserve(out.size() + s.records.size() * 14);
  char buf[32];
  for (const auto& r : s.records) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.timestamp_ns);
    out.append(buf, res.ptr);
    out += '\t';
    out += qcore::to_string(r.channel);
    out += '\n';
  }
  return out;
}

events::EventStream events_from_tsv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "#peqrng-events v1") throw InputError("event file: missing '#peqrng-events v1' header");
  events::EventStream s;
  std::size_t k = 1;
  for (; k < lines.size() && lines[k].starts_with("#"); ++k) {
    std::string_view kv = lines[k].substr(1);
    while (!kv.empty() && kv.front() == ' ') kv.remove_prefix(1);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InputError("event file: malformed header line");
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    if (key == "phi_rad") s.meta.phi_rad = parse_double(val, key);
    else if (key == "theta_rad") s.meta.theta_rad = parse_double(val, key);
    else if (key == "rate_hz") s.meta.rate_hz = parse_double(val, key);
    else if (key == "duration_s") s.meta.duration_s = parse_double(val, key);
    else if (key == "bin_width_us") s.meta.bin_width_us = parse_double(val, key);
    else if (key == "seed") s.meta.seed = parse_u64(val, key);
    else throw InputError("event file: unknown header key '" + std::string(key) + "'");
  }
  if (k >= lines.size() || lines[k] != "timestamp_ns\tchannel") throw InputError("event file: missing column header");
  s.records.reserve(lines.size() - k);
  for (++k; k < lines.size(); ++k) {
    const auto line = lines[k];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw InputError("event file: expected timestamp<TAB>channel");
    std::int64_t ts = 0;
    const auto res = std::from_chars(line.data(), line.data() + tab, ts);
    if (res.ec != std::errc() || res.ptr != line.data() + tab) throw InputError("event file: bad timestamp");
    s.records.push_back({ts, qcore::channel_from_string(std::string(line.substr(tab + 1)))});
  }
  s.validate();
  return s;
}

void write_events(const events::EventStream& s, const fs::path& path) { write_atomic(path, events_to_tsv(s)); }

events::EventStream read_events(const fs::path& path) { return events_from_tsv(read_text(path)); }

std::string grid_to_tsv(const bell::CorrelationGrid& g) {
  g.validate();
  std::string out = "#peqrng-grid v1\nphi_rad\ttheta_rad\tE\tstderr\n";
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const std::size_t c = i * g.cols() + j;
      out += format_double(g.phi_values[i]) + '\t' + format_double(g.theta_values[j]) + '\t';
      out += g.E[c] ? format_double(*g.E[c]) : "NA";
      out += '\t';
      out += !g.std_errors.empty() && g.std_errors[c] ? format_double(*g.std_errors[c]) : "NA";
      out += '\n';
    }
  return out;
}

bell::CorrelationGrid grid_from_tsv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != "#peqrng-grid v1" || lines[1] != "phi_rad\ttheta_rad\tE\tstderr")
    throw InputError("grid file: missing '#peqrng-grid v1' header");
  struct Cell {
    std::optional<double> e, se;
  };
  std::vector<double> phis, thetas;
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
  auto index_of = [](std::vector<double>& v, double x) {
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k] == x) return k;
    v.push_back(x);
    return v.size() - 1;
  };
  bool any_se = false;
  for (std::size_t k = 2; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto f = split_tabs(lines[k]);
    if (f.size() != 4) throw InputError("grid file: expected 4 columns");
    const std::size_t i = index_of(phis, parse_double(f[0], "phi"));
    const std::size_t j = index_of(thetas, parse_double(f[1], "theta"));
    Cell c;
    if (f[2] != "NA") c.e = parse_double(f[2], "E");
    if (f[3] != "NA") {
      c.se = parse_double(f[3], "stderr");
      any_se = true;
    }
    if (!cells.emplace(std::pair{i, j}, c).second) throw InputError("grid file: duplicate cell");
  }
  bell::CorrelationGrid g(phis, thetas);
  if (any_se) g.std_errors.resize(g.E.size());
  for (const auto& [key, c] : cells) {
    g.at(key.first, key.second) = c.e;
    if (any_se) g.std_errors[key.first * g.cols() + key.second] = c.se;
  }
  g.validate();
  return g;
}

std::string samples_to_tsv(const std::vector<CalibrationSample>& samples) {
  std::string out = "# power\tintensity\n";
  for (const auto& [w, i] : samples) out += format_double(w) + '\t' + format_double(i) + '\n';
  return out;
}

std::vector<CalibrationSample> samples_from_tsv(std::string_view text) {
  std::vector<CalibrationSample> out;
  for (const auto line : lines_of(text)) {
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 2) throw InputError("samples file: expected power<TAB>intensity");
    out.emplace_back(parse_double(f[0], "power"), parse_double(f[1], "intensity"));
  }
  return out;
}

}  // namespace peqrng::app

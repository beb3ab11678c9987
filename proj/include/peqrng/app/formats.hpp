#pragma once

// Text file formats: event TSV, correlation-grid TSV, calibration samples,
// plus atomic file writes and shortest round-trip number formatting.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peqrng/bell.hpp"
#include "peqrng/events.hpp"

namespace peqrng::app {

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);
std::uint64_t parse_u64(std::string_view s, std::string_view what);

std::string read_text(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// #peqrng-events v1
// # key=value          (phi_rad, theta_rad, rate_hz, duration_s, bin_width_us, seed)
// timestamp_ns<TAB>channel
std::string events_to_tsv(const events::EventStream& s);
events::EventStream events_from_tsv(std::string_view text);
void write_events(const events::EventStream& s, const std::filesystem::path& path);
events::EventStream read_events(const std::filesystem::path& path);

// #peqrng-grid v1
// phi_rad<TAB>theta_rad<TAB>E<TAB>stderr    (NA for missing values)
std::string grid_to_tsv(const bell::CorrelationGrid& g);
bell::CorrelationGrid grid_from_tsv(std::string_view text);

using CalibrationSample = std::pair<double, double>;  // (power, intensity)

// power<TAB>intensity per line; '#' starts a comment line.
std::string samples_to_tsv(const std::vector<CalibrationSample>& samples);
std::vector<CalibrationSample> samples_from_tsv(std::string_view text);

}  // namespace peqrng::app

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fluxrelax/analysis.hpp"

namespace fluxrelax::io {

inline constexpr std::string_view kSchemaId = "fluxrelax/v1";

/// Parses a device description (JSON object with unit-suffixed keys).
/// Unknown or duplicate keys are errors reporting line and column.
DeviceModel parse_device_json(std::string_view text, const std::string& source = "<input>");
DeviceModel parse_device_file(const std::filesystem::path& path);
std::string device_to_json(const DeviceModel& device);

struct T1Ingest {
  T1Dataset data;
  std::size_t dropped = 0;
};

/// Reads a T1 table with header columns phi_ext, t1_s and optionally
/// omega01_hz, t1_err_s, n_binned. Applies the ingest drop rule.
T1Ingest parse_t1_csv(std::string_view text, const std::string& qubit_id,
                      const std::string& source = "<input>");
T1Ingest parse_t1_csv_file(const std::filesystem::path& path);
std::string t1_to_csv(const T1Dataset& ds);

/// Reads echo dephasing rates: phi_ext, gamma_phi_e_per_s[, slope_rad_per_s_per_phi0].
DephasingDataset parse_dephasing_csv(std::string_view text, const std::string& qubit_id,
                                     const std::string& source = "<input>");
DephasingDataset parse_dephasing_csv_file(const std::filesystem::path& path);

std::string distribution_to_json(const QceffDistribution& dist);
QceffDistribution parse_distribution_json(std::string_view text, const std::string& source = "<input>");
QceffDistribution parse_distribution_file(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Entire file as bytes; DataError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a hash, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Splits CSV text into rows of fields (RFC 4180 quoting). Line numbers are 1-based.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source = "<input>");

}  // namespace fluxrelax::io

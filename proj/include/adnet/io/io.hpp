#pragma once

// Artifact formats. Every CSV starts with a "# schema: <name>" comment line
// and a header row; doubles are written in shortest round-trip form, so a
// write/read cycle is bit-exact.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adnet/metrics/measure.hpp"
#include "adnet/pde/pde.hpp"
#include "adnet/sim/simulate.hpp"

namespace adnet::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::string_view schema, const std::vector<std::string>& columns,
            const Json& meta = nullptr);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
  std::size_t columns_;
};

struct CsvTable {
  std::string schema;
  Json meta;  // null when absent
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws ParseError
};

CsvTable read_csv(const fs::path& path);

void write_event_log_csv(const fs::path& path, const EventLog& log);
EventLog read_event_log_csv(const fs::path& path);

/// Binary layout: magic "ADNETLOG", u32 version (1), u64 record count, then
/// per record f64 time, u8 kind, u32 j, u32 k, u8 old, u8 new, u8 channel
/// (20 bytes, packed), all little-endian.
void write_event_log_binary(const fs::path& path, const EventLog& log);
EventLog read_event_log_binary(const fs::path& path);

void write_series_csv(const fs::path& path, const DiscrepancySeries& series);
void write_intensity_csv(const fs::path& path, const IntensityBoundReport& report);

/// One "particle" row per particle (id, position, weight, initial state)
/// followed by one "jump" row per jump (id, time, new state); metadata line
/// carries M, horizon, generation and seed.
void write_measure_csv(const fs::path& path, const MeasureSample& mu);
MeasureSample read_measure_csv(const fs::path& path);

void write_paths_csv(const fs::path& path, const std::vector<TrajectoryPath>& paths,
                     const std::vector<Position>& positions);

void write_pde_csv(const fs::path& density_path, const fs::path& field_path,
                   const PdeSolution& solution);

void write_json(const fs::path& path, const Json& value);
Json read_json(const fs::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// Writes manifest.json in dir listing every regular file below dir (except
/// the manifest itself) with its SHA-256 and size, sorted by relative path.
Json write_manifest(const fs::path& dir, const Json& plan);

}  // namespace adnet::io

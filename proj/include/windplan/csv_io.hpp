#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "windplan/domain.hpp"

namespace windplan {

// Minimal RFC 4180 reader: comma separated, optional double quotes, first row is a header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by name; throws ValidationError naming `source` when absent.
  std::size_t column(std::string_view name, const std::string& source) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);
std::int64_t parse_int(std::string_view text, const std::string& context);

std::string csv_escape(std::string_view field);

struct IngestReport {
  std::size_t transformers_dropped_by_voltage = 0;
};

// Reads candidates.csv, municipalities.csv, existing.csv and transformers.csv
// from `dir`. Transformers outside {20, 110} kV are dropped. Derived
// municipal existing capacity is assigned. Missing files raise IoError,
// malformed content ValidationError.
Instance read_instance(const std::filesystem::path& dir, IngestReport* report = nullptr);

// Writes the four CSVs (plus metadata.txt when non-empty). The
// network_length_km column is emitted only when every candidate carries one.
void write_instance(const Instance& instance, const std::filesystem::path& dir);

void write_candidates_csv(const std::vector<CandidateSite>& candidates, const std::filesystem::path& path);

// Writes `content` to `path` atomically enough for our purposes; IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

inline constexpr const char* kCandidatesFile = "candidates.csv";
inline constexpr const char* kMunicipalitiesFile = "municipalities.csv";
inline constexpr const char* kExistingFile = "existing.csv";
inline constexpr const char* kTransformersFile = "transformers.csv";

}  // namespace windplan

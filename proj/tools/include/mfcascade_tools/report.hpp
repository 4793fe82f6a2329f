#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace mfc::tools {

inline constexpr int kSchemaVersion = 1;

/// One CSV file: '#'-prefixed JSON header, a column line, then rows.
/// Cells are preformatted strings (reals at 17 significant digits).
struct Table {
  std::string name;  // file stem
  nlohmann::ordered_json header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
};

std::string cell(double x);
std::string cell(long long x);
inline std::string cell(int x) { return cell(static_cast<long long>(x)); }
inline std::string cell(std::size_t x) { return cell(static_cast<long long>(x)); }
inline std::string cell(bool x) { return x ? "1" : "0"; }

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::map<std::string, std::string> config;
  std::vector<std::uint64_t> seeds;
  std::vector<Table> tables;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> runtimes;  // seconds

  bool passed() const;
  nlohmann::ordered_json summary() const;
};

/// Writes every table as <dir>/<name>.csv and the summary as <dir>/summary.json.
void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace mfc::tools

#include "mfcascade_tools/report.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <mfcascade/config_io.hpp>
#include <mfcascade/error.hpp>

namespace mfc::tools {

std::string cell(double x) { return format_real(x); }

std::string cell(long long x) { return std::to_string(x); }

void Table::write(std::ostream& out) const {
  out << '#' << header.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::ordered_json Report::summary() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = experiment;
  j["passed"] = passed();
  j["config"] = config;
  j["seeds"] = seeds;
  auto& cs = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["passed"] = c.passed;
    o["value"] = c.value;
    o["threshold"] = c.threshold;
    o["detail"] = c.detail;
    cs.push_back(o);
  }
  auto& files = j["files"] = nlohmann::ordered_json::array();
  for (const auto& t : tables) files.push_back(t.name + ".csv");
  auto& rt = j["runtimes_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [name, secs] : runtimes) rt[name] = secs;
  return j;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& t : report.tables) {
    std::ofstream out(dir / (t.name + ".csv"), std::ios::binary);
    if (!out) throw ResourceError("cannot write " + (dir / (t.name + ".csv")).string());
    t.write(out);
  }
  std::ofstream js(dir / "summary.json", std::ios::binary);
  if (!js) throw ResourceError("cannot write summary.json");
  js << report.summary().dump(2) << '\n';
}

}  // namespace mfc::tools

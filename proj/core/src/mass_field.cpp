#include "mfcascade/mass_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mfcascade/error.hpp"
#include "mfcascade/word.hpp"

namespace mfc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr char kMagic[4] = {'M', 'F', 'C', 'F'};
constexpr int kFormatVersion = 1;

nlohmann::ordered_json header_json(const MassField& f) {
  const auto& m = f.metadata();
  nlohmann::ordered_json h;
  h["format"] = "mfcascade.massfield";
  h["version"] = kFormatVersion;
  h["base"] = f.base();
  h["depth"] = f.depth();
  h["seed"] = m.seed;
  h["model"] = m.model;
  h["root"] = m.root;
  h["q"] = m.q ? nlohmann::ordered_json(*m.q) : nlohmann::ordered_json(nullptr);
  h["tau_q"] = m.tau_q;
  h["tail_depth"] = m.tail_depth;
  h["mode"] = std::string(to_string(m.mode));
  h["nonpositive"] = m.nonpositive;
  h["tail_discrepancy"] = m.tail_discrepancy;
  h["mass_units"] = "log_b";
  return h;
}

struct Header {
  int base = 2;
  int depth = 0;
  FieldMetadata meta;
};

Header parse_header(const std::string& text) {
  const auto h = nlohmann::json::parse(text);
  if (h.value("format", "") != "mfcascade.massfield") throw ConfigError("not a mass field header");
  if (h.value("version", 0) != kFormatVersion) throw ConfigError("unsupported mass field version");
  Header out;
  out.base = h.at("base").get<int>();
  out.depth = h.at("depth").get<int>();
  out.meta.seed = h.at("seed").get<std::uint64_t>();
  out.meta.model = h.at("model").get<std::string>();
  out.meta.root = h.at("root").get<std::string>();
  if (!h.at("q").is_null()) out.meta.q = h.at("q").get<double>();
  out.meta.tau_q = h.at("tau_q").get<double>();
  out.meta.tail_depth = h.at("tail_depth").get<int>();
  out.meta.mode = construction_mode_from_string(h.at("mode").get<std::string>());
  out.meta.nonpositive = h.at("nonpositive").get<std::size_t>();
  out.meta.tail_discrepancy = h.at("tail_discrepancy").get<double>();
  return out;
}

std::vector<std::vector<double>> empty_rows(int base, int depth) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(depth) + 1);
  for (int d = 0; d <= depth; ++d) rows[static_cast<std::size_t>(d)].assign(ipow(base, d), std::numeric_limits<double>::quiet_NaN());
  return rows;
}

void check_complete(const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows)
    for (double x : r)
      if (std::isnan(x)) throw ConfigError("mass field file is missing records");
}

}  // namespace

std::string_view to_string(ConstructionMode mode) {
  return mode == ConstructionMode::critical ? "critical" : "nondegenerate";
}

ConstructionMode construction_mode_from_string(std::string_view name) {
  if (name == "nondegenerate") return ConstructionMode::nondegenerate;
  if (name == "critical") return ConstructionMode::critical;
  throw ConfigError("unknown construction mode '" + std::string(name) + "'");
}

double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

MassField::MassField(int base, std::vector<std::vector<double>> log_rows, FieldMetadata meta)
    : base_(base), rows_(std::move(log_rows)), meta_(std::move(meta)) {
  if (rows_.empty()) throw std::invalid_argument("MassField: needs at least the root row");
  for (std::size_t d = 0; d < rows_.size(); ++d)
    if (rows_[d].size() != ipow(base_, static_cast<int>(d))) throw std::invalid_argument("MassField: row size must be b^depth");
}

std::span<const double> MassField::log_row(int depth) const {
  if (depth < 0 || depth > this->depth()) throw std::out_of_range("MassField: depth out of range");
  return rows_[static_cast<std::size_t>(depth)];
}

double MassField::mass(int depth, std::uint64_t index) const { return std::exp(log_mass(depth, index)); }

std::vector<double> MassField::masses(int depth) const {
  const auto r = log_row(depth);
  std::vector<double> out(r.size());
  std::transform(r.begin(), r.end(), out.begin(), [](double x) { return std::exp(x); });
  return out;
}

double MassField::log_total(int depth) const { return log_sum_exp(log_row(depth)); }

void write_csv(const MassField& field, std::ostream& out) {
  out << '#' << header_json(field).dump() << '\n';
  out << "depth,index,log_b_mass\n";
  const double log_b = std::log(static_cast<double>(field.base()));
  std::array<char, 64> buf{};
  for (int d = 0; d <= field.depth(); ++d) {
    const auto row = field.log_row(d);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf.data(), buf.size(), "%d,%zu,%.17g\n", d, i, row[i] / log_b);
      out << buf.data();
    }
  }
}

MassField read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') throw ConfigError("mass field CSV: missing header line");
  const auto header = parse_header(line.substr(1));
  if (!std::getline(in, line) || line != "depth,index,log_b_mass") throw ConfigError("mass field CSV: bad column line");
  auto rows = empty_rows(header.base, header.depth);
  const double log_b = std::log(static_cast<double>(header.base));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int d = 0;
    std::uint64_t i = 0;
    std::string value;
    char c1 = 0;
    char c2 = 0;
    if (!(ls >> d >> c1 >> i >> c2) || c1 != ',' || c2 != ',') throw ConfigError("mass field CSV: malformed row '" + line + "'");
    std::getline(ls, value);
    if (d < 0 || d > header.depth || i >= rows[static_cast<std::size_t>(d)].size())
      throw ConfigError("mass field CSV: record out of range");
    const double v = value == "-inf" ? kNegInf : std::strtod(value.c_str(), nullptr);
    rows[static_cast<std::size_t>(d)][i] = v * log_b;
  }
  check_complete(rows);
  return MassField(header.base, std::move(rows), header.meta);
}

void write_binary(const MassField& field, std::ostream& out) {
  const std::string h = header_json(field).dump();
  const auto len = static_cast<std::uint32_t>(h.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  const double log_b = std::log(static_cast<double>(field.base()));
  for (int d = 0; d <= field.depth(); ++d) {
    const auto row = field.log_row(d);
    const auto depth = static_cast<std::uint32_t>(d);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto index = static_cast<std::uint64_t>(i);
      const double v = row[i] / log_b;
      out.write(reinterpret_cast<const char*>(&depth), sizeof depth);
      out.write(reinterpret_cast<const char*>(&index), sizeof index);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}

MassField read_binary(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("mass field binary: bad magic");
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string h(len, '\0');
  in.read(h.data(), len);
  if (!in) throw ConfigError("mass field binary: truncated header");
  const auto header = parse_header(h);
  auto rows = empty_rows(header.base, header.depth);
  const double log_b = std::log(static_cast<double>(header.base));
  std::uint32_t d = 0;
  std::uint64_t i = 0;
  double v = 0.0;
  while (in.read(reinterpret_cast<char*>(&d), sizeof d)) {
    in.read(reinterpret_cast<char*>(&i), sizeof i);
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ConfigError("mass field binary: truncated record");
    if (d > static_cast<std::uint32_t>(header.depth) || i >= rows[d].size()) throw ConfigError("mass field binary: record out of range");
    rows[d][i] = v * log_b;
  }
  check_complete(rows);
  return MassField(header.base, std::move(rows), header.meta);
}

}  // namespace mfc

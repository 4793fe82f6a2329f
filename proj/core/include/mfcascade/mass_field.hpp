#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfc {

enum class ConstructionMode { nondegenerate, critical };

std::string_view to_string(ConstructionMode mode);
ConstructionMode construction_mode_from_string(std::string_view name);

struct FieldMetadata {
  std::uint64_t seed = 0;
  std::string model;  // WeightModel::describe()
  std::string root;   // digits of the copy's root word; empty for mu itself
  std::optional<double> q;
  double tau_q = 0.0;  // tau~(q) used by the tilt, 0 when q is absent
  int tail_depth = 0;
  ConstructionMode mode = ConstructionMode::nondegenerate;
  std::size_t nonpositive = 0;    // critical truncations that came out <= 0
  double tail_discrepancy = 0.0;  // max relative additivity defect parent vs children
};

/// Masses mu(I_w) of every b-adic interval with |w| <= depth for one
/// realization, stored as natural logarithms. A non-positive critical
/// truncation is stored as -infinity and counted in the metadata.
class MassField {
 public:
  MassField(int base, std::vector<std::vector<double>> log_rows, FieldMetadata meta);

  int base() const noexcept { return base_; }
  int depth() const noexcept { return static_cast<int>(rows_.size()) - 1; }
  const FieldMetadata& metadata() const noexcept { return meta_; }

  std::span<const double> log_row(int depth) const;
  double log_mass(int depth, std::uint64_t index) const { return log_row(depth)[index]; }
  double mass(int depth, std::uint64_t index) const;
  std::vector<double> masses(int depth) const;
  /// ln of the row sum at `depth`.
  double log_total(int depth) const;

 private:
  int base_;
  std::vector<std::vector<double>> rows_;
  FieldMetadata meta_;
};

/// CSV layout: one '#'-prefixed JSON header line, then
/// `depth,index,log_b_mass` rows (17 significant digits).
void write_csv(const MassField& field, std::ostream& out);
MassField read_csv(std::istream& in);

/// Binary layout: magic "MFCF", u32 header length, JSON header, then per
/// record u32 depth, u64 index, f64 log_b mass (little-endian host order).
void write_binary(const MassField& field, std::ostream& out);
MassField read_binary(std::istream& in);

/// log(sum exp(x)) over a span; -inf for an empty or all -inf span.
double log_sum_exp(std::span<const double> xs);

}  // namespace mfc

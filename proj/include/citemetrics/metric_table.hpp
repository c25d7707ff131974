#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citemetrics/csv.hpp"

namespace citemetrics {

/// One paper's computed metrics. Absent values persist as empty cells.
struct MetricRow {
  std::string id;
  int year = 0;
  std::string domain;
  std::string field;
  std::string team_band;
  std::optional<std::int64_t> citations;
  std::optional<std::int64_t> n_refs;

  std::optional<std::int64_t> n_a;
  std::optional<std::int64_t> n_b;
  std::optional<std::int64_t> n_c;
  std::optional<double> d_index;
  std::string dominant_ref;
  std::optional<std::int64_t> c_max;
  std::optional<double> d_local;
  std::optional<double> b_dom;
  std::optional<double> d_approx;

  std::optional<double> a_index;
  std::optional<std::int64_t> n_pairs;
  std::optional<double> span;
  std::optional<std::int64_t> n_fields;

  std::optional<double> sbi;
  std::optional<std::int64_t> t_m;

  std::optional<double> sim_focal_dom;
  std::optional<double> sim_dom_rest;
  std::optional<std::int64_t> n_rest;
  std::optional<double> field_overlap;
  std::optional<std::int64_t> cite_diff;
  std::optional<std::int64_t> year_diff;

  std::string label;
  std::uint32_t flags = 0;
};

enum class ColumnType { kStr, kInt, kReal, kFlags };

struct ColumnInfo {
  std::string_view name;
  ColumnType type;
};

/// Persisted column order.
const std::vector<ColumnInfo>& metric_columns();

class MetricTable {
 public:
  MetricTable() = default;
  explicit MetricTable(std::vector<MetricRow> rows);

  const std::vector<MetricRow>& rows() const { return rows_; }
  std::vector<MetricRow>& mutable_rows() { return rows_; }
  std::size_t size() const { return rows_.size(); }
  /// Throws DataError on a duplicate id.
  void add(MetricRow row);
  const MetricRow* find(std::string_view id) const;
  MetricRow* find(std::string_view id);

  /// Numeric view of a column, including ints and the derived `decade`.
  /// Throws UsageError for unknown or non-numeric columns.
  std::vector<std::optional<double>> numeric(std::string_view column) const;
  /// String view for fixed-effect factors: domain, field, team_band, label,
  /// decade, year, dominant_ref, id. Empty cells come back as nullopt.
  std::vector<std::optional<std::string>> factor(std::string_view column) const;

  /// CSV with a typed header (`name:type`) and optional provenance comments.
  void write_csv(std::ostream& out, const Provenance* provenance = nullptr) const;
  static MetricTable read_csv(std::istream& in, const std::string& name = "<stream>");
  static MetricTable load(const std::filesystem::path& path);

 private:
  std::vector<MetricRow> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace citemetrics

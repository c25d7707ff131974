#include "citemetrics/metric_table.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "citemetrics/disruption.hpp"
#include "citemetrics/error.hpp"

namespace citemetrics {

namespace {

using IntField = std::optional<std::int64_t> MetricRow::*;
using RealField = std::optional<double> MetricRow::*;
using StrField = std::string MetricRow::*;

struct Column {
  ColumnInfo info;
  std::function<std::string(const MetricRow&)> get;
  std::function<void(MetricRow&, const std::string&)> set;
  std::function<std::optional<double>(const MetricRow&)> numeric;  // empty for text columns
};

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("bad integer '" + s + "'");
  return v;
}

double parse_real(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad number '" + s + "'");
  }
}

Column str_col(std::string_view name, StrField f) {
  return {{name, ColumnType::kStr},
          [f](const MetricRow& r) { return r.*f; },
          [f](MetricRow& r, const std::string& s) { r.*f = s; },
          {}};
}

Column int_col(std::string_view name, IntField f) {
  return {{name, ColumnType::kInt},
          [f](const MetricRow& r) { return r.*f ? std::to_string(*(r.*f)) : std::string{}; },
          [f](MetricRow& r, const std::string& s) {
            if (s.empty()) {
              (r.*f).reset();
            } else {
              r.*f = parse_int(s);
            }
          },
          [f](const MetricRow& r) -> std::optional<double> {
            if (!(r.*f)) return std::nullopt;
            return static_cast<double>(*(r.*f));
          }};
}

Column real_col(std::string_view name, RealField f) {
  return {{name, ColumnType::kReal},
          [f](const MetricRow& r) { return format_real_exact(r.*f); },
          [f](MetricRow& r, const std::string& s) {
            if (s.empty()) {
              (r.*f).reset();
            } else {
              r.*f = parse_real(s);
            }
          },
          [f](const MetricRow& r) { return r.*f; }};
}

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = [] {
    std::vector<Column> c;
    c.push_back(str_col("id", &MetricRow::id));
    c.push_back({{"year", ColumnType::kInt},
                 [](const MetricRow& r) { return std::to_string(r.year); },
                 [](MetricRow& r, const std::string& s) { r.year = static_cast<int>(parse_int(s)); },
                 [](const MetricRow& r) -> std::optional<double> { return r.year; }});
    c.push_back(str_col("domain", &MetricRow::domain));
    c.push_back(str_col("field", &MetricRow::field));
    c.push_back(str_col("team_band", &MetricRow::team_band));
    c.push_back(int_col("citations", &MetricRow::citations));
    c.push_back(int_col("n_refs", &MetricRow::n_refs));
    c.push_back(int_col("n_a", &MetricRow::n_a));
    c.push_back(int_col("n_b", &MetricRow::n_b));
    c.push_back(int_col("n_c", &MetricRow::n_c));
    c.push_back(real_col("d_index", &MetricRow::d_index));
    c.push_back(str_col("dominant_ref", &MetricRow::dominant_ref));
    c.push_back(int_col("c_max", &MetricRow::c_max));
    c.push_back(real_col("d_local", &MetricRow::d_local));
    c.push_back(real_col("b_dom", &MetricRow::b_dom));
    c.push_back(real_col("d_approx", &MetricRow::d_approx));
    c.push_back(real_col("a_index", &MetricRow::a_index));
    c.push_back(int_col("n_pairs", &MetricRow::n_pairs));
    c.push_back(real_col("span", &MetricRow::span));
    c.push_back(int_col("n_fields", &MetricRow::n_fields));
    c.push_back(real_col("sbi", &MetricRow::sbi));
    c.push_back(int_col("t_m", &MetricRow::t_m));
    c.push_back(real_col("sim_focal_dom", &MetricRow::sim_focal_dom));
    c.push_back(real_col("sim_dom_rest", &MetricRow::sim_dom_rest));
    c.push_back(int_col("n_rest", &MetricRow::n_rest));
    c.push_back(real_col("field_overlap", &MetricRow::field_overlap));
    c.push_back(int_col("cite_diff", &MetricRow::cite_diff));
    c.push_back(int_col("year_diff", &MetricRow::year_diff));
    c.push_back(str_col("label", &MetricRow::label));
    c.push_back({{"flags", ColumnType::kFlags},
                 [](const MetricRow& r) { return flags_to_string(r.flags); },
                 [](MetricRow& r, const std::string& s) { r.flags = flags_from_string(s); },
                 {}});
    return c;
  }();
  return cols;
}

std::string_view type_name(ColumnType t) {
  switch (t) {
    case ColumnType::kStr:
      return "str";
    case ColumnType::kInt:
      return "int";
    case ColumnType::kReal:
      return "real";
    case ColumnType::kFlags:
      return "flags";
  }
  return "str";
}

std::string decade_of(int year) {
  const int d = (year >= 0 ? year / 10 : (year - 9) / 10) * 10;
  return std::to_string(d) + "s";
}

}  // namespace

const std::vector<ColumnInfo>& metric_columns() {
  static const std::vector<ColumnInfo> infos = [] {
    std::vector<ColumnInfo> v;
    for (const auto& c : columns()) v.push_back(c.info);
    return v;
  }();
  return infos;
}

MetricTable::MetricTable(std::vector<MetricRow> rows) {
  for (auto& r : rows) add(std::move(r));
}

void MetricTable::add(MetricRow row) {
  if (row.id.empty()) throw DataError("metric row with empty id");
  auto [it, inserted] = index_.emplace(row.id, rows_.size());
  if (!inserted) throw DataError("duplicate metric row id '" + row.id + "'");
  rows_.push_back(std::move(row));
}

const MetricRow* MetricTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

MetricRow* MetricTable::find(std::string_view id) {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<std::optional<double>> MetricTable::numeric(std::string_view column) const {
  std::vector<std::optional<double>> out;
  out.reserve(rows_.size());
  if (column == "decade") {
    for (const auto& r : rows_) out.push_back(static_cast<double>((r.year >= 0 ? r.year / 10 : (r.year - 9) / 10) * 10));
    return out;
  }
  for (const auto& c : columns()) {
    if (c.info.name != column) continue;
    if (!c.numeric) throw UsageError("column '" + std::string(column) + "' is not numeric");
    for (const auto& r : rows_) out.push_back(c.numeric(r));
    return out;
  }
  throw UsageError("unknown metric column '" + std::string(column) + "'");
}

std::vector<std::optional<std::string>> MetricTable::factor(std::string_view column) const {
  std::vector<std::optional<std::string>> out;
  out.reserve(rows_.size());
  if (column == "decade") {
    for (const auto& r : rows_) out.push_back(decade_of(r.year));
    return out;
  }
  for (const auto& c : columns()) {
    if (c.info.name != column) continue;
    if (c.info.type == ColumnType::kReal || c.info.type == ColumnType::kFlags) {
      throw UsageError("column '" + std::string(column) + "' cannot be used as a factor");
    }
    for (const auto& r : rows_) {
      auto s = c.get(r);
      out.push_back(s.empty() ? std::nullopt : std::optional<std::string>(std::move(s)));
    }
    return out;
  }
  throw UsageError("unknown metric column '" + std::string(column) + "'");
}

void MetricTable::write_csv(std::ostream& out, const Provenance* provenance) const {
  CsvWriter w(out, provenance);
  std::vector<std::string> header;
  for (const auto& c : columns()) header.push_back(std::string(c.info.name) + ":" + std::string(type_name(c.info.type)));
  w.header(header);
  std::vector<std::string> cells;
  for (const auto& r : rows_) {
    cells.clear();
    for (const auto& c : columns()) cells.push_back(c.get(r));
    w.row(cells);
  }
}

MetricTable MetricTable::read_csv(std::istream& in, const std::string& name) {
  const CsvTable csv = citemetrics::read_csv(in, name);
  std::vector<std::pair<const Column*, int>> mapping;
  for (const auto& c : columns()) {
    const int idx = csv.column(c.info.name);
    if (idx >= 0) mapping.emplace_back(&c, idx);
  }
  if (csv.column("id") < 0 || csv.column("year") < 0) throw DataError(name + ": metric table needs id and year columns");
  MetricTable table;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    MetricRow row;
    try {
      for (const auto& [col, idx] : mapping) col->set(row, csv.rows[i][static_cast<std::size_t>(idx)]);
      table.add(std::move(row));
    } catch (const DataError& e) {
      throw DataError(name + ": row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return table;
}

MetricTable MetricTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open metric table " + path.string());
  return read_csv(in, path.string());
}

}  // namespace citemetrics

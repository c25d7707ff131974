#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citemetrics {

/// Identifies the run that produced an output file. Written as leading
/// `#` comment lines on every CSV the tool emits.
struct Provenance {
  std::string config_json;  // canonical (sorted-key) JSON
  std::string hash_hex() const;
};

/// FNV-1a over the bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

/// Nine significant digits, correctly rounded; NaN/inf print as empty cells.
std::string format_real(double v);
std::string format_real(std::optional<double> v);
/// Shortest text that parses back to the same double.
std::string format_real_exact(double v);
std::string format_real_exact(std::optional<double> v);

std::string csv_escape(std::string_view field);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const Provenance* provenance = nullptr);

  void header(const std::vector<std::string>& names) { row(names); }
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// `#` comment lines preceding the header, without the leading marker.
  std::vector<std::string> comments;

  /// Index of `name` in the header (ignoring any `:type` suffix), or -1.
  int column(std::string_view name) const;
};

/// Parses RFC 4180-style CSV. Lines starting with `#` before the header are
/// collected as comments; blank lines are skipped. Throws DataError.
CsvTable read_csv(std::istream& in, const std::string& source_name = "<stream>");
CsvTable read_csv_file(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace citemetrics

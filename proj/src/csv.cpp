#include "citemetrics/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "citemetrics/error.hpp"

namespace citemetrics {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Provenance::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_json)));
  return buf;
}

std::string format_real(double v) {
  if (!std::isfinite(v)) return {};
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_real(std::optional<double> v) { return v ? format_real(*v) : std::string{}; }

std::string format_real_exact(double v) {
  if (!std::isfinite(v)) return {};
  if (v == 0.0) return "0";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_real_exact(std::optional<double> v) { return v ? format_real_exact(*v) : std::string{}; }

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, const Provenance* provenance) : out_(out) {
  if (provenance) {
    out_ << "# config_hash=" << provenance->hash_hex() << '\n';
    out_ << "# config=" << provenance->config_json << '\n';
  }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(cells[i]);
  }
  out_ << '\n';
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view h = header[i];
    if (auto colon = h.find(':'); colon != std::string_view::npos) h = h.substr(0, colon);
    if (h == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  cells.push_back(std::move(cur));
  return cells;
}

CsvTable read_csv(std::istream& in, const std::string& source_name) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header && line.front() == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const DataError& e) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError(source_name + ": missing header row");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, path.string());
}

}  // namespace citemetrics

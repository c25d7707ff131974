#include "citemetrics/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "citemetrics/csv.hpp"
#include "citemetrics/error.hpp"

namespace citemetrics {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxReportedIssues = 100;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::kScienceEngineering:
      return "Science & Engineering";
    case Domain::kSocialSciences:
      return "Social Sciences";
    case Domain::kArtsHumanities:
      return "Arts & Humanities";
    case Domain::kUnknown:
      break;
  }
  return "Unknown";
}

Domain parse_domain(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "science & engineering" || t == "se") return Domain::kScienceEngineering;
  if (t == "social sciences" || t == "ss") return Domain::kSocialSciences;
  if (t == "arts & humanities" || t == "ah") return Domain::kArtsHumanities;
  if (t == "unknown") return Domain::kUnknown;
  throw DataError("unknown domain '" + std::string(text) + "'");
}

PaperRecord parse_record(std::string_view json_line) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  PaperRecord r;
  auto id = obj.find("id");
  if (id == obj.end() || !id->is_string()) throw DataError("missing string field 'id'");
  r.id = id->get<std::string>();
  if (r.id.empty()) throw DataError("empty 'id'");

  auto year = obj.find("year");
  if (year == obj.end() || !year->is_number_integer()) throw DataError("missing integer field 'year'");
  r.year = year->get<int>();

  r.venue = optional_string(obj, "venue");
  if (r.venue && r.venue->empty()) r.venue.reset();

  if (auto refs = obj.find("refs"); refs != obj.end() && !refs->is_null()) {
    if (!refs->is_array()) throw DataError("'refs' must be an array");
    r.refs.reserve(refs->size());
    for (const auto& ref : *refs) {
      if (!ref.is_string()) throw DataError("'refs' entries must be strings");
      r.refs.push_back(ref.get<std::string>());
    }
  }

  if (auto fields = obj.find("fields"); fields != obj.end() && !fields->is_null()) {
    if (!fields->is_array()) throw DataError("'fields' must be an array");
    for (const auto& f : *fields) {
      if (!f.is_object()) throw DataError("'fields' entries must be objects");
      FieldLabel label;
      auto l = f.find("label");
      auto lv = f.find("level");
      auto sc = f.find("score");
      if (l == f.end() || !l->is_string()) throw DataError("field entry missing 'label'");
      if (lv == f.end() || !lv->is_number_integer()) throw DataError("field entry missing integer 'level'");
      if (sc == f.end() || !sc->is_number()) throw DataError("field entry missing numeric 'score'");
      label.label = l->get<std::string>();
      label.level = lv->get<int>();
      label.score = sc->get<double>();
      if (label.level < 0 || label.level > 5) throw DataError("field level outside 0..5");
      if (!(label.score >= 0.0 && label.score <= 1.0)) throw DataError("field score outside [0,1]");
      r.fields.push_back(std::move(label));
    }
  }

  if (auto n = obj.find("n_authors"); n != obj.end() && !n->is_null()) {
    if (!n->is_number_integer()) throw DataError("'n_authors' must be an integer");
    r.n_authors = n->get<int>();
    if (r.n_authors < 1) throw DataError("'n_authors' must be >= 1");
  }

  r.title = optional_string(obj, "title");
  r.abstract = optional_string(obj, "abstract");
  r.version_of = optional_string(obj, "version_of");
  return r;
}

std::string to_json_line(const PaperRecord& r) {
  // Key order mirrors the documented schema; ordered_json keeps it.
  nlohmann::ordered_json obj;
  obj["id"] = r.id;
  obj["year"] = r.year;
  obj["venue"] = r.venue ? json(*r.venue) : json(nullptr);
  obj["refs"] = r.refs;
  auto fields = nlohmann::ordered_json::array();
  for (const auto& f : r.fields) {
    fields.push_back({{"label", f.label}, {"level", f.level}, {"score", f.score}});
  }
  obj["fields"] = std::move(fields);
  obj["n_authors"] = r.n_authors;
  obj["title"] = r.title ? json(*r.title) : json(nullptr);
  obj["abstract"] = r.abstract ? json(*r.abstract) : json(nullptr);
  obj["version_of"] = r.version_of ? json(*r.version_of) : json(nullptr);
  return obj.dump();
}

void DomainMap::add(std::string label, Domain domain) { map_[std::move(label)] = domain; }

std::optional<Domain> DomainMap::lookup(std::string_view label) const {
  auto it = map_.find(label);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

DomainMap DomainMap::from_csv(std::istream& in) {
  DomainMap m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) throw DataError("domain map line " + std::to_string(line_no) + ": expected label,domain");
    if (line_no == 1 && lower(trim(cells[0])) == "label" && lower(trim(cells[1])) == "domain") continue;
    try {
      m.add(trim(cells[0]), parse_domain(cells[1]));
    } catch (const DataError& e) {
      throw DataError("domain map line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

DomainMap DomainMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open domain map " + path.string());
  return from_csv(in);
}

std::string team_size_band(int author_count, int cap) {
  if (cap < 2) cap = 2;
  if (author_count >= cap) return std::to_string(cap) + "+";
  return std::to_string(std::max(author_count, 1));
}

bool RequireFilter::accepts(const PaperRecord& r) const {
  if (refs && r.refs.empty()) return false;
  if (venue && !r.venue) return false;
  if (year_min && r.year < *year_min) return false;
  if (year_max && r.year > *year_max) return false;
  return true;
}

RequireFilter RequireFilter::parse(std::string_view spec) {
  RequireFilter f;
  std::stringstream ss{std::string(spec)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "refs") {
      f.refs = true;
    } else if (item == "venue") {
      f.venue = true;
    } else if (item.rfind("year=", 0) == 0) {
      auto range = item.substr(5);
      auto colon = range.find(':');
      try {
        if (colon == std::string::npos) {
          f.year_min = f.year_max = std::stoi(range);
        } else {
          if (colon > 0) f.year_min = std::stoi(range.substr(0, colon));
          if (colon + 1 < range.size()) f.year_max = std::stoi(range.substr(colon + 1));
        }
      } catch (const std::exception&) {
        throw UsageError("bad year range in --require: " + item);
      }
    } else {
      throw UsageError("unknown --require item '" + item + "' (expected refs, venue, year=A:B)");
    }
  }
  return f;
}

std::string IngestReport::to_json(const std::string& config_hash) const {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["papers"] = papers;
  j["edges"] = edges;
  j["dangling_refs"] = dangling_refs;
  j["self_refs_removed"] = self_refs_removed;
  j["parse_errors"] = parse_errors;
  j["duplicate_refs_collapsed"] = duplicate_refs_collapsed;
  j["duplicate_ids"] = duplicate_ids;
  j["filtered_out"] = filtered_out;
  j["unmapped_domains"] = unmapped_domains;
  j["dangling_versions"] = dangling_versions;
  auto files_json = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    files_json.push_back({{"path", f.path}, {"lines", f.lines}, {"records", f.records}, {"errors", f.errors}});
  }
  j["files"] = std::move(files_json);
  auto issues_json = nlohmann::ordered_json::array();
  for (const auto& i : issues) {
    issues_json.push_back({{"file", i.file}, {"line", i.line}, {"message", i.message}});
  }
  j["issues"] = std::move(issues_json);
  return j.dump(2) + "\n";
}

std::vector<PaperRecord> read_records(std::istream& in, const std::string& name, bool strict, FileStats& stats,
                                      std::vector<ParseIssue>& issues) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  stats.path = name;
  stats.lines = lines.size();

  // Lines parse independently; results are collected in line order.
  std::vector<std::optional<PaperRecord>> parsed(lines.size());
  std::vector<std::string> errors(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 512)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& line = lines[static_cast<std::size_t>(i)];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      parsed[static_cast<std::size_t>(i)] = parse_record(line);
    } catch (const DataError& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }

  std::vector<PaperRecord> records;
  records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!errors[i].empty()) {
      if (strict) throw DataError(name + ":" + std::to_string(i + 1) + ": " + errors[i]);
      ++stats.errors;
      if (issues.size() < kMaxReportedIssues) issues.push_back({name, i + 1, errors[i]});
      continue;
    }
    if (parsed[i]) records.push_back(std::move(*parsed[i]));
  }
  stats.records = records.size();
  return records;
}

CorpusGraph ingest(const std::vector<std::filesystem::path>& paths, const DomainMap& domains,
                   const IngestOptions& options, IngestReport* report) {
  if (paths.empty()) throw UsageError("no corpus files given");
  IngestReport local;
  std::vector<PaperRecord> all;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file " + path.string());
    FileStats stats;
    auto records = read_records(in, path.string(), options.strict, stats, local.issues);
    local.parse_errors += stats.errors;
    local.files.push_back(stats);
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  auto graph = build_graph(std::move(all), domains, options, &local);
  if (report) *report = std::move(local);
  return graph;
}

CorpusGraph build_graph(std::vector<PaperRecord> records, const DomainMap& domains, const IngestOptions& options,
                        IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;

  CorpusGraph g;
  // Pass 1: accept records and assign dense indexes in input order.
  std::vector<PaperRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    if (!options.require.accepts(r)) {
      ++rep.filtered_out;
      continue;
    }
    auto [it, inserted] = g.id_map_.emplace(r.id, static_cast<PaperIndex>(kept.size()));
    if (!inserted) {
      ++rep.duplicate_ids;
      if (options.strict) throw DataError("duplicate paper id '" + r.id + "'");
      continue;
    }
    kept.push_back(std::move(r));
  }
  records.clear();
  if (kept.empty()) throw DataError("empty corpus: no usable records");
  if (kept.size() >= kNoPaper) throw DataError("corpus too large for 32-bit paper indexes");

  const std::size_t n = kept.size();
  g.ids_.reserve(n);
  g.years_.reserve(n);
  g.n_authors_.reserve(n);

  // Venues get indexes in lexicographic name order so that canonical pair
  // keys (m <= n) agree with name order.
  std::map<std::string, VenueIndex> venue_ids;
  for (const auto& r : kept) {
    if (r.venue) venue_ids.emplace(*r.venue, 0);
  }
  for (auto& [name, idx] : venue_ids) {
    idx = static_cast<VenueIndex>(g.venue_names_.size());
    g.venue_names_.push_back(name);
  }

  g.ref_offsets_.assign(n + 1, 0);
  std::vector<PaperIndex> seen(n, kNoPaper);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = kept[i];
    const auto self = static_cast<PaperIndex>(i);
    for (const auto& ref : r.refs) {
      auto it = g.id_map_.find(ref);
      if (it == g.id_map_.end()) {
        ++rep.dangling_refs;
        continue;
      }
      const PaperIndex target = it->second;
      if (target == self) {
        ++rep.self_refs_removed;
        continue;
      }
      if (seen[target] == self) {
        ++rep.duplicate_refs_collapsed;
        continue;
      }
      seen[target] = self;
      g.ref_targets_.push_back(target);
    }
    g.ref_offsets_[i + 1] = g.ref_targets_.size();

    g.ids_.push_back(r.id);
    g.years_.push_back(r.year);
    g.venues_.push_back(r.venue ? venue_ids.at(*r.venue) : kNoVenue);
    g.n_authors_.push_back(r.n_authors);

    const FieldLabel* top = nullptr;
    for (const auto& f : r.fields) {
      if (f.level == 0 && (!top || f.score > top->score)) top = &f;
    }
    Domain d = Domain::kUnknown;
    if (top) {
      if (auto mapped = domains.lookup(top->label)) {
        d = *mapped;
      } else {
        ++rep.unmapped_domains;
      }
    }
    g.domains_.push_back(d);
    g.primary_field_.push_back(top ? top->label : std::string{});
    g.fields_.push_back(std::move(r.fields));
    g.titles_.push_back(std::move(r.title));
    g.abstracts_.push_back(std::move(r.abstract));
    g.year_index_[r.year].push_back(self);
  }

  g.version_of_.assign(n, kNoPaper);
  for (std::size_t i = 0; i < n; ++i) {
    if (!kept[i].version_of) continue;
    auto it = g.id_map_.find(*kept[i].version_of);
    if (it == g.id_map_.end() || it->second == i) {
      ++rep.dangling_versions;
    } else {
      g.version_of_[i] = it->second;
    }
  }

  // Transpose by counting sort; sources come out ascending.
  g.cite_offsets_.assign(n + 1, 0);
  for (PaperIndex t : g.ref_targets_) ++g.cite_offsets_[t + 1];
  for (std::size_t i = 0; i < n; ++i) g.cite_offsets_[i + 1] += g.cite_offsets_[i];
  g.cite_sources_.resize(g.ref_targets_.size());
  std::vector<std::size_t> cursor(g.cite_offsets_.begin(), g.cite_offsets_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = g.ref_offsets_[i]; e < g.ref_offsets_[i + 1]; ++e) {
      g.cite_sources_[cursor[g.ref_targets_[e]]++] = static_cast<PaperIndex>(i);
    }
  }

  rep.papers = n;
  rep.edges = g.ref_targets_.size();
  return g;
}

std::optional<PaperIndex> CorpusGraph::find(std::string_view id) const {
  auto it = id_map_.find(std::string(id));
  if (it == id_map_.end()) return std::nullopt;
  return it->second;
}

PaperIndex CorpusGraph::at(std::string_view id) const {
  if (auto p = find(id)) return *p;
  throw DataError("unknown paper id '" + std::string(id) + "'");
}

std::span<const PaperIndex> CorpusGraph::papers_in_year(int year) const {
  auto it = year_index_.find(year);
  if (it == year_index_.end()) return {};
  return it->second;
}

std::vector<int> CorpusGraph::years() const {
  std::vector<int> out;
  out.reserve(year_index_.size());
  for (const auto& [y, _] : year_index_) out.push_back(y);
  return out;
}

}  // namespace citemetrics

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace citemetrics {

using PaperIndex = std::uint32_t;
using VenueIndex = std::uint32_t;
inline constexpr PaperIndex kNoPaper = std::numeric_limits<PaperIndex>::max();
inline constexpr VenueIndex kNoVenue = std::numeric_limits<VenueIndex>::max();

enum class Domain : std::uint8_t {
  kUnknown,
  kScienceEngineering,
  kSocialSciences,
  kArtsHumanities,
};

std::string_view to_string(Domain d);
/// Accepts the full names ("Science & Engineering", ...) case-insensitively,
/// plus the short forms "SE", "SS", "AH". Throws DataError otherwise.
Domain parse_domain(std::string_view text);

struct FieldLabel {
  std::string label;
  int level = 0;       // 0..5
  double score = 0.0;  // confidence in [0, 1]
};

/// One publication as it appears in a corpus file.
struct PaperRecord {
  std::string id;
  int year = 0;
  std::optional<std::string> venue;
  std::vector<std::string> refs;
  std::vector<FieldLabel> fields;
  int n_authors = 1;
  std::optional<std::string> title;
  std::optional<std::string> abstract;
  std::optional<std::string> version_of;
};

/// Parses one JSONL object. Throws DataError describing the first problem.
PaperRecord parse_record(std::string_view json_line);
std::string to_json_line(const PaperRecord& record);

/// Level-0 field label -> macro-domain.
class DomainMap {
 public:
  void add(std::string label, Domain domain);
  std::optional<Domain> lookup(std::string_view label) const;
  std::size_t size() const { return map_.size(); }

  /// Two-column CSV `label,domain`; an optional header row is skipped.
  static DomainMap from_csv(std::istream& in);
  static DomainMap load(const std::filesystem::path& path);

 private:
  std::map<std::string, Domain, std::less<>> map_;
};

/// Team-size banding: "1", "2", ..., "<cap>+".
std::string team_size_band(int author_count, int cap = 5);

/// Completeness filter applied before graph construction. Permissive by default.
struct RequireFilter {
  bool refs = false;   // at least one reference listed
  bool venue = false;  // venue present
  std::optional<int> year_min;
  std::optional<int> year_max;

  bool accepts(const PaperRecord& r) const;
  /// Parses a comma list such as "refs,venue,year=1965:2024".
  static RequireFilter parse(std::string_view spec);
};

struct IngestOptions {
  bool strict = false;
  RequireFilter require;
};

struct ParseIssue {
  std::string file;
  std::size_t line = 0;
  std::string message;
};

struct FileStats {
  std::string path;
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t errors = 0;
};

struct IngestReport {
  std::size_t papers = 0;
  std::size_t edges = 0;
  std::size_t dangling_refs = 0;
  std::size_t self_refs_removed = 0;
  std::size_t duplicate_refs_collapsed = 0;
  std::size_t duplicate_ids = 0;
  std::size_t filtered_out = 0;
  std::size_t unmapped_domains = 0;
  std::size_t dangling_versions = 0;
  std::size_t parse_errors = 0;
  std::vector<ParseIssue> issues;  // first few, for diagnostics
  std::vector<FileStats> files;

  std::string to_json(const std::string& config_hash = {}) const;
};

class CorpusGraph;

/// Normalizes records (dedup refs, drop self and dangling refs, reject
/// duplicate ids) and freezes them into a graph. Internal indexes follow
/// record order. Throws DataError on an empty result.
CorpusGraph build_graph(std::vector<PaperRecord> records, const DomainMap& domains,
                        const IngestOptions& options = {}, IngestReport* report = nullptr);

/// Reads JSONL records. Malformed lines are recorded and skipped, or throw
/// DataError in strict mode.
std::vector<PaperRecord> read_records(std::istream& in, const std::string& name, bool strict, FileStats& stats,
                                      std::vector<ParseIssue>& issues);

CorpusGraph ingest(const std::vector<std::filesystem::path>& paths, const DomainMap& domains,
                   const IngestOptions& options = {}, IngestReport* report = nullptr);

/// Immutable citation graph in CSR form with both adjacency directions.
class CorpusGraph {
 public:
  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return ref_targets_.size(); }

  std::span<const PaperIndex> references(PaperIndex p) const {
    return {ref_targets_.data() + ref_offsets_[p], ref_targets_.data() + ref_offsets_[p + 1]};
  }
  /// Sorted ascending by internal index.
  std::span<const PaperIndex> citers(PaperIndex p) const {
    return {cite_sources_.data() + cite_offsets_[p], cite_sources_.data() + cite_offsets_[p + 1]};
  }
  std::size_t total_citations(PaperIndex p) const { return cite_offsets_[p + 1] - cite_offsets_[p]; }

  const std::string& external_id(PaperIndex p) const { return ids_[p]; }
  std::optional<PaperIndex> find(std::string_view id) const;
  /// Throws DataError for unknown ids.
  PaperIndex at(std::string_view id) const;

  int year(PaperIndex p) const { return years_[p]; }
  VenueIndex venue(PaperIndex p) const { return venues_[p]; }
  const std::string& venue_name(VenueIndex v) const { return venue_names_[v]; }
  std::size_t venue_count() const { return venue_names_.size(); }
  int author_count(PaperIndex p) const { return n_authors_[p]; }
  Domain domain(PaperIndex p) const { return domains_[p]; }
  /// Highest-confidence level-0 label, empty when none.
  const std::string& primary_field(PaperIndex p) const { return primary_field_[p]; }
  const std::vector<FieldLabel>& fields(PaperIndex p) const { return fields_[p]; }
  const std::optional<std::string>& title(PaperIndex p) const { return titles_[p]; }
  const std::optional<std::string>& abstract(PaperIndex p) const { return abstracts_[p]; }
  PaperIndex version_of(PaperIndex p) const { return version_of_[p]; }

  std::span<const PaperIndex> papers_in_year(int year) const;
  /// Distinct publication years, ascending.
  std::vector<int> years() const;

 private:
  friend CorpusGraph build_graph(std::vector<PaperRecord>, const DomainMap&, const IngestOptions&, IngestReport*);

  std::vector<std::string> ids_;
  std::unordered_map<std::string, PaperIndex> id_map_;
  std::vector<int> years_;
  std::vector<VenueIndex> venues_;
  std::vector<std::string> venue_names_;
  std::vector<int> n_authors_;
  std::vector<Domain> domains_;
  std::vector<std::string> primary_field_;
  std::vector<std::vector<FieldLabel>> fields_;
  std::vector<std::optional<std::string>> titles_;
  std::vector<std::optional<std::string>> abstracts_;
  std::vector<PaperIndex> version_of_;

  std::vector<std::size_t> ref_offsets_;
  std::vector<PaperIndex> ref_targets_;
  std::vector<std::size_t> cite_offsets_;
  std::vector<PaperIndex> cite_sources_;

  std::map<int, std::vector<PaperIndex>> year_index_;
};

}  // namespace citemetrics

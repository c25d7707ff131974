#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citemetrics/corpus.hpp"
#include "citemetrics/csv.hpp"
#include "citemetrics/disruption.hpp"
#include "citemetrics/longitudinal.hpp"
#include "citemetrics/metric_table.hpp"
#include "citemetrics/novelty.hpp"
#include "citemetrics/semantics.hpp"

namespace citemetrics {

/// Everything that determines a run's output. Serialized (minus out_dir and
/// threads, which do not affect results) into every output header.
struct RunConfig {
  std::vector<std::string> corpus;
  std::string domains;
  std::string require;
  bool strict = false;

  std::string window = "all";
  int randomizations = 10;
  std::uint64_t seed = 1;
  std::optional<int> year_min;
  std::optional<int> year_max;

  std::string thresholds = "top1";  // top1, top5, or top:<fraction>
  std::string paper_embeddings;
  std::string field_embeddings;
  std::string span_labels = "top";  // top or all
  std::string centroid = "mean";    // mean or normalized
  std::string labels;
  std::string nominations;
  std::string regression;

  std::vector<std::string> analyses;
  std::size_t k = 100;
  DecadeRange decades;
  std::size_t bins = 10;
  int bootstrap = 1000;
  std::optional<int> sbi_horizon;  // defaults to the last corpus year
  double sbi_top = 0.05;
  int min_citations = 1;  // analysis sample for trend and topic similarity

  std::string out_dir = "out";
  int threads = 0;

  /// Relative paths resolve against `base_dir`. Unknown keys are errors.
  static RunConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  /// Sorted-key JSON of the result-affecting fields.
  std::string canonical_json() const;
  Provenance provenance() const;
  bool wants(std::string_view analysis) const;
};

/// Analysis names accepted in RunConfig::analyses.
const std::vector<std::string>& analysis_names();

CorpusGraph load_corpus(const RunConfig& config, IngestReport* report = nullptr);

/// Two-column `id,class` file; every class must be in `allowed`. A header
/// row whose first cell is `id` is skipped. Throws DataError otherwise.
std::unordered_map<std::string, std::string> read_id_classes(const std::filesystem::path& path,
                                                             const std::vector<std::string>& allowed);
/// theory | method | finding
std::unordered_map<std::string, std::string> read_labels(const std::filesystem::path& path);
/// disruptive | consolidating
std::unordered_map<std::string, std::string> read_nominations(const std::filesystem::path& path);

struct LabelJoin {
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};
LabelJoin join_labels(MetricTable& table, const std::unordered_map<std::string, std::string>& labels);

struct MetricStages {
  bool novelty = true;
  bool sbi = true;
  bool span = false;
  bool topicsim = false;
};

struct MetricInputs {
  const EmbeddingStore* paper_embeddings = nullptr;
  const EmbeddingStore* field_embeddings = nullptr;
};

/// One row per paper. Papers below min_citations keep their row but get no
/// topic-similarity cells.
MetricTable compute_metrics(const CorpusGraph& graph, const RunConfig& config, const MetricStages& stages,
                            const MetricInputs& inputs, NoveltyRun* novelty_out = nullptr);

/// Writers shared by `run`, `report` and the single-analysis subcommands.
/// Each writes CSV with provenance comments to `out`.
void write_pairs_csv(std::ostream& out, const CorpusGraph& graph, const std::map<int, PairStatsMap>& pairs,
                     const Provenance* prov);
void write_trend(std::ostream& bins_out, std::ostream& fits_out, const MetricTable& table, std::string_view x,
                 std::string_view y, const std::vector<std::string>& group_by, std::size_t bins,
                 std::int64_t min_citations, const Provenance* prov);
void write_conservation(std::ostream& out, const MetricTable& table, const std::vector<std::pair<std::string, Thresholds>>& sets,
                        const Provenance* prov);
void write_shares(std::ostream& out, const MetricTable& table, const Provenance* prov);
void write_sbi_compare(std::ostream& out, const MetricTable& table, double top_fraction, int resamples,
                       std::uint64_t seed, const Provenance* prov);
void write_topicsim(std::ostream& bins_out, std::ostream& fits_out, const MetricTable& table, std::size_t bins,
                    const Provenance* prov);
void write_dominance(std::ostream& out, const std::vector<DominanceScore>& scores, const Provenance* prov);
void write_versions(std::ostream& pairs_out, std::ostream& bins_out, std::ostream& fit_out,
                    const VersionAnalysis& analysis, const Provenance* prov);
void write_auc(std::ostream& out, const MetricTable& table, const std::unordered_map<std::string, std::string>& nominations,
               const Provenance* prov);
void write_label_groups(std::ostream& out, const MetricTable& table, int resamples, std::uint64_t seed,
                        const Provenance* prov);

/// Default model set: similarity percentile on D percentile among D > 0,
/// then with fixed effects, then with controls.
std::string default_regression_json();

Thresholds resolve_thresholds(const RunConfig& config, const MetricTable& table);

struct RunSummary {
  MetricTable table;
  std::vector<std::string> files;  // written, relative to out_dir, sorted
};

/// Ingest, compute metrics, emit every requested analysis under out_dir.
/// Fails before any computation when a requested analysis lacks an input.
RunSummary run_pipeline(const RunConfig& config);

/// Emits analyses from an existing metric table; `graph` may be null when no
/// requested analysis needs the corpus.
std::vector<std::string> run_report(const RunConfig& config, MetricTable& table, const CorpusGraph* graph);

}  // namespace citemetrics

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "citemetrics/corpus.hpp"
#include "citemetrics/semantics.hpp"

namespace citemetrics {

/// Order-independent key for a venue pair; the smaller index goes high.
constexpr std::uint64_t pair_key(VenueIndex a, VenueIndex b) {
  if (a > b) {
    const VenueIndex t = a;
    a = b;
    b = t;
  }
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
constexpr VenueIndex pair_first(std::uint64_t key) { return static_cast<VenueIndex>(key >> 32); }
constexpr VenueIndex pair_second(std::uint64_t key) { return static_cast<VenueIndex>(key & 0xffffffffu); }

using PairCounts = std::unordered_map<std::uint64_t, std::int64_t>;

struct JournalPairStats {
  VenueIndex m = kNoVenue;  // m <= n
  VenueIndex n = kNoVenue;
  std::int64_t obs = 0;
  double exp = 0.0;
  double sigma = 0.0;        // sample (n - 1) standard deviation over shuffles
  std::optional<double> z;  // absent when sigma == 0
};

using PairStatsMap = std::unordered_map<std::uint64_t, JournalPairStats>;

/// (obs - exp) / sigma; nullopt when sigma is not positive.
std::optional<double> z_score(double obs, double exp, double sigma);

/// Reference lists of every paper published in one year, in CSR form.
/// `citing` is ascending; targets may repeat after shuffling.
struct ReferenceAssignment {
  std::vector<PaperIndex> citing;
  std::vector<std::size_t> offsets;  // size citing.size() + 1
  std::vector<PaperIndex> targets;

  std::span<const PaperIndex> refs_of(std::size_t i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }
};

ReferenceAssignment observed_assignment(const CorpusGraph& graph, int year);

/// Permutes cited endpoints among citing slots, within strata of equal
/// cited-paper year. Citing reference counts and each stratum's target
/// multiset are preserved. Deterministic in `seed`.
ReferenceAssignment null_model_shuffle(const CorpusGraph& graph, int year, std::uint64_t seed);

/// Venue pairs over every pair of reference positions, self-pairs included;
/// references without a venue are skipped.
PairCounts count_pairs(const CorpusGraph& graph, const ReferenceAssignment& assignment);
PairCounts cocite_counts(const CorpusGraph& graph, int year);

/// Observed counts against `randomizations` shuffles. Shuffles run in
/// parallel; integer accumulation keeps results bit-identical across
/// thread counts. Throws UsageError when randomizations < 2.
PairStatsMap pair_zscores(const CorpusGraph& graph, int year, int randomizations, std::uint64_t seed);
PairStatsMap pair_zscores_serial(const CorpusGraph& graph, int year, int randomizations, std::uint64_t seed);

struct NoveltyResult {
  PaperIndex focal = kNoPaper;
  std::uint32_t n_pairs = 0;
  double z_p10 = 0.0;
  double a_index = 0.0;  // -z_p10; valid unless kFlagAUndefined
  std::uint32_t flags = 0;

  bool defined() const;
};

/// Negated 10th percentile of a z multiset; nullopt when empty.
std::optional<double> atypicality_from_z(std::vector<double> z);

/// `stats` must be the pair table for the focal's publication year.
NoveltyResult a_index(const CorpusGraph& graph, PaperIndex focal, const PairStatsMap& stats);

/// log2(p_mn / (p_m p_n)). Throws NumericError outside (0, 1] or when
/// p_mn exceeds either marginal.
double pmi(double p_mn, double p_m, double p_n);

struct NoveltyOptions {
  int randomizations = 10;
  std::uint64_t seed = 0;
  std::optional<int> year_min;
  std::optional<int> year_max;
};

struct NoveltyRun {
  std::vector<NoveltyResult> results;  // one per paper; out-of-range years flagged undefined
  std::map<int, PairStatsMap> pairs;   // only when requested
};

NoveltyRun novelty_all(const CorpusGraph& graph, const NoveltyOptions& options, bool keep_pairs = false);

/// Which level-1 labels of a reference enter the knowledge span.
enum class SpanLabels {
  kTopConfidence,  // the reference's single highest-confidence level-1 label
  kAll,            // every level-1 label of the reference
};

struct KnowledgeSpanResult {
  PaperIndex focal = kNoPaper;
  double span = 0.0;  // max pairwise cosine distance, in [0, 2]
  std::uint32_t n_fields = 0;
  std::uint32_t flags = 0;
};

KnowledgeSpanResult knowledge_span(const CorpusGraph& graph, PaperIndex focal, const EmbeddingStore& field_embeddings,
                                   SpanLabels labels = SpanLabels::kTopConfidence);

}  // namespace citemetrics

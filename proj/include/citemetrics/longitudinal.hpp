#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "citemetrics/corpus.hpp"
#include "citemetrics/metric_table.hpp"
#include "citemetrics/stats.hpp"

namespace citemetrics {

struct CitationHistory {
  PaperIndex focal = kNoPaper;
  int year0 = 0;
  std::vector<std::int64_t> counts;  // counts[t] = citers published in year0 + t
};

/// Annual citer counts from publication through `horizon_year`. Citers dated
/// before publication are folded into t = 0; later ones past the horizon are
/// dropped.
CitationHistory citation_history(const CorpusGraph& graph, PaperIndex focal, int horizon_year);

struct SleepingBeautyResult {
  double b = 0.0;
  int t_m = 0;  // first argmax of the history
};

/// Sleeping Beauty coefficient: sum over t <= t_m of (l_t - c_t) / max(1, c_t)
/// where l_t is the straight line from (0, c_0) to (t_m, c_{t_m}).
SleepingBeautyResult sbi(std::span<const std::int64_t> counts);

struct Thresholds {
  double d = 0.3;
  double a = 43.0;

  static Thresholds top1() { return {0.3, 43.0}; }
  static Thresholds top5() { return {0.02, 23.4}; }
};

/// Cut-offs for the top `fraction` of defined D and A values in the table.
Thresholds empirical_thresholds(const MetricTable& table, double fraction);

struct YearCount {
  int year = 0;
  std::size_t papers = 0;
  std::size_t above_d = 0;
  std::size_t above_a = 0;
};

/// Papers per year with D > thresholds.d and, separately, A > thresholds.a.
/// Years in [year_min, year_max] without papers appear with zeros.
std::vector<YearCount> conservation_counts(const MetricTable& table, const Thresholds& thresholds,
                                           std::optional<int> year_min = {}, std::optional<int> year_max = {});

struct YearShare {
  int year = 0;
  std::size_t n_d = 0;  // papers with defined D
  std::size_t n_a = 0;
  std::optional<double> share_d;  // fraction with D > 0
  std::optional<double> share_a;  // fraction with A > 0
};

std::vector<YearShare> share_trends(const MetricTable& table);
/// Same, split by a factor column such as "domain".
std::map<std::string, std::vector<YearShare>> share_trends_by(const MetricTable& table, std::string_view factor);

double jaccard(std::span<const PaperIndex> sorted_a, std::span<const PaperIndex> sorted_b);

struct DecadeRange {
  int from = 1970;
  int to = 2020;
  int step = 10;
};

struct DominanceScore {
  int start = 0;
  int end = 0;
  std::string category;
  std::size_t k = 0;
  double score = 0.0;
  std::uint32_t flags = 0;  // kFlagFewerThanK when a category had fewer than k candidates
};

/// Jaccard similarity of the top-k most cited papers (citations accrued up
/// to each boundary) between boundaries t and t + step, per category and for
/// all labeled papers together ("all").
std::vector<DominanceScore> dominance_scores(const CorpusGraph& graph,
                                             const std::unordered_map<std::string, std::string>& labels,
                                             std::size_t k, const DecadeRange& range);

struct VersionPairDelta {
  std::string v1;  // the record named by version_of
  std::string v2;  // the record declaring version_of
  int year1 = 0;
  int year2 = 0;
  double delta_a = 0.0;
  double delta_d = 0.0;
  double citer_jaccard = 0.0;
};

struct VersionAnalysis {
  std::vector<VersionPairDelta> pairs;
  std::size_t excluded = 0;  // pairs with an undefined metric
  std::optional<stats::BinnedTrend> trend;  // delta_d over delta_a bins
};

VersionAnalysis version_pair_deltas(const CorpusGraph& graph, const MetricTable& table, std::size_t bins = 10);

}  // namespace citemetrics

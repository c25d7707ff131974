#include "citemetrics/longitudinal.hpp"

#include <algorithm>
#include <set>

#include "citemetrics/disruption.hpp"
#include "citemetrics/error.hpp"

namespace citemetrics {

CitationHistory citation_history(const CorpusGraph& graph, PaperIndex focal, int horizon_year) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  CitationHistory h;
  h.focal = focal;
  h.year0 = graph.year(focal);
  if (horizon_year < h.year0) return h;
  h.counts.assign(static_cast<std::size_t>(horizon_year - h.year0) + 1, 0);
  for (PaperIndex c : graph.citers(focal)) {
    const int y = graph.year(c);
    if (y > horizon_year) continue;
    ++h.counts[static_cast<std::size_t>(std::max(0, y - h.year0))];
  }
  return h;
}

SleepingBeautyResult sbi(std::span<const std::int64_t> counts) {
  SleepingBeautyResult r;
  if (counts.empty()) return r;
  r.t_m = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  if (r.t_m == 0) return r;
  const double c0 = static_cast<double>(counts[0]);
  const double slope = (static_cast<double>(counts[static_cast<std::size_t>(r.t_m)]) - c0) / r.t_m;
  double b = 0.0;
  for (int t = 0; t <= r.t_m; ++t) {
    const double c = static_cast<double>(counts[static_cast<std::size_t>(t)]);
    b += (slope * t + c0 - c) / std::max(1.0, c);
  }
  r.b = b;
  return r;
}

Thresholds empirical_thresholds(const MetricTable& table, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("top fraction must be in (0,1)");
  std::vector<double> d, a;
  for (const auto& r : table.rows()) {
    if (r.d_index) d.push_back(*r.d_index);
    if (r.a_index) a.push_back(*r.a_index);
  }
  if (d.empty() || a.empty()) throw NumericError("empirical thresholds need defined D and A values");
  std::sort(d.begin(), d.end());
  std::sort(a.begin(), a.end());
  return {stats::quantile_linear(d, 1.0 - fraction), stats::quantile_linear(a, 1.0 - fraction)};
}

std::vector<YearCount> conservation_counts(const MetricTable& table, const Thresholds& thresholds,
                                           std::optional<int> year_min, std::optional<int> year_max) {
  std::map<int, YearCount> by_year;
  if (year_min && year_max) {
    for (int y = *year_min; y <= *year_max; ++y) by_year[y].year = y;
  }
  for (const auto& r : table.rows()) {
    if ((year_min && r.year < *year_min) || (year_max && r.year > *year_max)) continue;
    auto& c = by_year[r.year];
    c.year = r.year;
    ++c.papers;
    if (r.d_index && *r.d_index > thresholds.d) ++c.above_d;
    if (r.a_index && *r.a_index > thresholds.a) ++c.above_a;
  }
  std::vector<YearCount> out;
  for (auto& [y, c] : by_year) out.push_back(c);
  return out;
}

namespace {

std::vector<YearShare> shares_for(const MetricTable& table, const std::vector<std::size_t>& rows) {
  struct Acc {
    std::size_t n_d = 0, pos_d = 0, n_a = 0, pos_a = 0;
  };
  std::map<int, Acc> by_year;
  for (std::size_t i : rows) {
    const auto& r = table.rows()[i];
    auto& acc = by_year[r.year];
    if (r.d_index) {
      ++acc.n_d;
      if (*r.d_index > 0.0) ++acc.pos_d;
    }
    if (r.a_index) {
      ++acc.n_a;
      if (*r.a_index > 0.0) ++acc.pos_a;
    }
  }
  std::vector<YearShare> out;
  for (const auto& [y, acc] : by_year) {
    if (acc.n_d == 0 && acc.n_a == 0) continue;
    YearShare s;
    s.year = y;
    s.n_d = acc.n_d;
    s.n_a = acc.n_a;
    if (acc.n_d) s.share_d = static_cast<double>(acc.pos_d) / static_cast<double>(acc.n_d);
    if (acc.n_a) s.share_a = static_cast<double>(acc.pos_a) / static_cast<double>(acc.n_a);
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<YearShare> share_trends(const MetricTable& table) {
  std::vector<std::size_t> all(table.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return shares_for(table, all);
}

std::map<std::string, std::vector<YearShare>> share_trends_by(const MetricTable& table, std::string_view factor) {
  const auto levels = table.factor(factor);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i]) groups[*levels[i]].push_back(i);
  }
  std::map<std::string, std::vector<YearShare>> out;
  for (const auto& [level, rows] : groups) out.emplace(level, shares_for(table, rows));
  return out;
}

double jaccard(std::span<const PaperIndex> a, std::span<const PaperIndex> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::vector<DominanceScore> dominance_scores(const CorpusGraph& graph,
                                             const std::unordered_map<std::string, std::string>& labels,
                                             std::size_t k, const DecadeRange& range) {
  if (k < 1) throw UsageError("dominance k must be >= 1");
  if (range.step < 1 || range.to < range.from) throw UsageError("bad decade range");

  std::map<std::string, std::vector<PaperIndex>> members;
  for (const auto& [id, category] : labels) {
    if (auto p = graph.find(id)) {
      members[category].push_back(*p);
      members["all"].push_back(*p);
    }
  }
  // Sorted citer years per labeled paper, for cumulative counts at any boundary.
  std::unordered_map<PaperIndex, std::vector<int>> citer_years;
  for (const auto& p : members["all"]) {
    auto& ys = citer_years[p];
    for (PaperIndex c : graph.citers(p)) ys.push_back(graph.year(c));
    std::sort(ys.begin(), ys.end());
  }

  auto top_k = [&](const std::vector<PaperIndex>& papers, int boundary, bool& short_flag) {
    std::vector<std::pair<std::size_t, PaperIndex>> ranked;
    for (PaperIndex p : papers) {
      if (graph.year(p) > boundary) continue;
      const auto& ys = citer_years[p];
      const auto cites = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), boundary) - ys.begin());
      ranked.emplace_back(cites, p);
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      if (graph.year(x.second) != graph.year(y.second)) return graph.year(x.second) < graph.year(y.second);
      return graph.external_id(x.second) < graph.external_id(y.second);
    });
    if (ranked.size() < k) short_flag = true;
    std::vector<PaperIndex> top;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) top.push_back(ranked[i].second);
    std::sort(top.begin(), top.end());
    return top;
  };

  std::vector<DominanceScore> out;
  for (const auto& [category, papers] : members) {
    for (int t = range.from; t + range.step <= range.to; t += range.step) {
      bool short_flag = false;
      const auto a = top_k(papers, t, short_flag);
      const auto b = top_k(papers, t + range.step, short_flag);
      DominanceScore s;
      s.start = t;
      s.end = t + range.step;
      s.category = category;
      s.k = k;
      s.score = jaccard(a, b);
      if (short_flag) s.flags |= kFlagFewerThanK;
      out.push_back(std::move(s));
    }
  }
  return out;
}

VersionAnalysis version_pair_deltas(const CorpusGraph& graph, const MetricTable& table, std::size_t bins) {
  VersionAnalysis out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto v2 = static_cast<PaperIndex>(i);
    const PaperIndex v1 = graph.version_of(v2);
    if (v1 == kNoPaper) continue;
    const MetricRow* r1 = table.find(graph.external_id(v1));
    const MetricRow* r2 = table.find(graph.external_id(v2));
    if (!r1 || !r2 || !r1->a_index || !r2->a_index || !r1->d_index || !r2->d_index) {
      ++out.excluded;
      continue;
    }
    VersionPairDelta d;
    d.v1 = graph.external_id(v1);
    d.v2 = graph.external_id(v2);
    d.year1 = graph.year(v1);
    d.year2 = graph.year(v2);
    d.delta_a = *r2->a_index - *r1->a_index;
    d.delta_d = *r2->d_index - *r1->d_index;
    d.citer_jaccard = jaccard(graph.citers(v1), graph.citers(v2));
    out.pairs.push_back(std::move(d));
  }
  if (out.pairs.size() >= std::max<std::size_t>(bins, 3)) {
    std::vector<double> x, y;
    for (const auto& p : out.pairs) {
      x.push_back(p.delta_a);
      y.push_back(p.delta_d);
    }
    try {
      out.trend = stats::binned_trend(x, y, bins);
    } catch (const NumericError&) {
      // degenerate delta_a; leave the trend empty
    }
  }
  return out;
}

}  // namespace citemetrics

#include "citemetrics/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "citemetrics/disruption.hpp"
#include "citemetrics/error.hpp"
#include "citemetrics/parallel.hpp"
#include "citemetrics/random.hpp"
#include "citemetrics/stats.hpp"

namespace citemetrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  std::int64_t sum = 0;
  std::int64_t sumsq = 0;
};
using MomentMap = std::unordered_map<std::uint64_t, Moments>;

std::uint64_t shuffle_seed(std::uint64_t seed, int year, int r) {
  return derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(year)), static_cast<std::uint64_t>(r));
}

void accumulate(MomentMap& acc, const PairCounts& counts) {
  for (const auto& [key, c] : counts) {
    auto& m = acc[key];
    m.sum += c;
    m.sumsq += c * c;
  }
}

PairStatsMap finalize(const PairCounts& obs, const MomentMap& acc, int randomizations) {
  PairStatsMap out;
  out.reserve(obs.size() + acc.size());
  const auto r = static_cast<int128>(randomizations);
  auto emit = [&](std::uint64_t key, std::int64_t observed, Moments m) {
    JournalPairStats s;
    s.m = pair_first(key);
    s.n = pair_second(key);
    s.obs = observed;
    s.exp = static_cast<double>(m.sum) / static_cast<double>(randomizations);
    // Exact integer numerator, so sigma == 0 is detected without rounding noise.
    const int128 num = r * m.sumsq - static_cast<int128>(m.sum) * m.sum;
    s.sigma = num > 0 ? std::sqrt(static_cast<double>(num) / (static_cast<double>(randomizations) *
                                                               static_cast<double>(randomizations - 1)))
                      : 0.0;
    s.z = z_score(static_cast<double>(observed), s.exp, s.sigma);
    out.emplace(key, s);
  };
  for (const auto& [key, c] : obs) {
    auto it = acc.find(key);
    emit(key, c, it == acc.end() ? Moments{} : it->second);
  }
  for (const auto& [key, m] : acc) {
    if (!obs.contains(key)) emit(key, 0, m);
  }
  return out;
}

void check_randomizations(int randomizations) {
  if (randomizations < 2) throw UsageError("need at least 2 randomizations");
}

}  // namespace

std::optional<double> z_score(double obs, double exp, double sigma) {
  if (!(sigma > 0.0)) return std::nullopt;
  return (obs - exp) / sigma;
}

ReferenceAssignment observed_assignment(const CorpusGraph& graph, int year) {
  ReferenceAssignment a;
  const auto papers = graph.papers_in_year(year);
  a.citing.assign(papers.begin(), papers.end());
  a.offsets.reserve(papers.size() + 1);
  a.offsets.push_back(0);
  for (PaperIndex p : papers) {
    const auto refs = graph.references(p);
    a.targets.insert(a.targets.end(), refs.begin(), refs.end());
    a.offsets.push_back(a.targets.size());
  }
  return a;
}

ReferenceAssignment null_model_shuffle(const CorpusGraph& graph, int year, std::uint64_t seed) {
  ReferenceAssignment a = observed_assignment(graph, year);
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t slot = 0; slot < a.targets.size(); ++slot) strata[graph.year(a.targets[slot])].push_back(slot);

  Rng rng(seed);
  std::vector<PaperIndex> buf;
  for (const auto& [cited_year, slots] : strata) {
    if (slots.size() <= 1) continue;
    buf.clear();
    for (std::size_t s : slots) buf.push_back(a.targets[s]);
    rng.shuffle(buf.begin(), buf.end());
    for (std::size_t i = 0; i < slots.size(); ++i) a.targets[slots[i]] = buf[i];
  }
  return a;
}

PairCounts count_pairs(const CorpusGraph& graph, const ReferenceAssignment& assignment) {
  PairCounts counts;
  std::vector<VenueIndex> venues;
  for (std::size_t i = 0; i < assignment.citing.size(); ++i) {
    venues.clear();
    for (PaperIndex r : assignment.refs_of(i)) {
      if (graph.venue(r) != kNoVenue) venues.push_back(graph.venue(r));
    }
    for (std::size_t x = 0; x < venues.size(); ++x) {
      for (std::size_t y = x + 1; y < venues.size(); ++y) ++counts[pair_key(venues[x], venues[y])];
    }
  }
  return counts;
}

PairCounts cocite_counts(const CorpusGraph& graph, int year) {
  return count_pairs(graph, observed_assignment(graph, year));
}

PairStatsMap pair_zscores(const CorpusGraph& graph, int year, int randomizations, std::uint64_t seed) {
  check_randomizations(randomizations);
  const PairCounts obs = cocite_counts(graph, year);
  std::vector<MomentMap> partial(static_cast<std::size_t>(max_threads()));
#pragma omp parallel
  {
    auto& local = partial[static_cast<std::size_t>(thread_id())];
#pragma omp for schedule(dynamic, 1)
    for (int r = 0; r < randomizations; ++r) {
      accumulate(local, count_pairs(graph, null_model_shuffle(graph, year, shuffle_seed(seed, year, r))));
    }
  }
  MomentMap acc;
  for (const auto& local : partial) {
    for (const auto& [key, m] : local) {
      auto& t = acc[key];
      t.sum += m.sum;
      t.sumsq += m.sumsq;
    }
  }
  return finalize(obs, acc, randomizations);
}

PairStatsMap pair_zscores_serial(const CorpusGraph& graph, int year, int randomizations, std::uint64_t seed) {
  check_randomizations(randomizations);
  const PairCounts obs = cocite_counts(graph, year);
  MomentMap acc;
  for (int r = 0; r < randomizations; ++r) {
    accumulate(acc, count_pairs(graph, null_model_shuffle(graph, year, shuffle_seed(seed, year, r))));
  }
  return finalize(obs, acc, randomizations);
}

bool NoveltyResult::defined() const { return (flags & kFlagAUndefined) == 0; }

std::optional<double> atypicality_from_z(std::vector<double> z) {
  if (z.empty()) return std::nullopt;
  std::sort(z.begin(), z.end());
  return -stats::quantile_linear(z, 0.10);
}

NoveltyResult a_index(const CorpusGraph& graph, PaperIndex focal, const PairStatsMap& stats) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  NoveltyResult res;
  res.focal = focal;
  std::vector<VenueIndex> venues;
  for (PaperIndex r : graph.references(focal)) {
    if (graph.venue(r) != kNoVenue) venues.push_back(graph.venue(r));
  }
  std::vector<double> z;
  for (std::size_t x = 0; x < venues.size(); ++x) {
    for (std::size_t y = x + 1; y < venues.size(); ++y) {
      auto it = stats.find(pair_key(venues[x], venues[y]));
      if (it != stats.end() && it->second.z) z.push_back(*it->second.z);
    }
  }
  res.n_pairs = static_cast<std::uint32_t>(z.size());
  if (auto a = atypicality_from_z(std::move(z))) {
    res.a_index = *a;
    res.z_p10 = -*a;
    std::sort(venues.begin(), venues.end());
    if (std::unique(venues.begin(), venues.end()) - venues.begin() == 1) res.flags |= kFlagSelfPairsOnly;
  } else {
    res.a_index = res.z_p10 = kNaN;
    res.flags |= kFlagAUndefined;
  }
  return res;
}

double pmi(double p_mn, double p_m, double p_n) {
  auto valid = [](double p) { return p > 0.0 && p <= 1.0; };
  if (!valid(p_mn) || !valid(p_m) || !valid(p_n)) throw NumericError("pmi: probabilities must lie in (0, 1]");
  if (p_mn > std::min(p_m, p_n)) throw NumericError("pmi: joint probability exceeds a marginal");
  return std::log2(p_mn / (p_m * p_n));
}

NoveltyRun novelty_all(const CorpusGraph& graph, const NoveltyOptions& options, bool keep_pairs) {
  NoveltyRun run;
  run.results.resize(graph.size());
  for (std::size_t p = 0; p < graph.size(); ++p) {
    run.results[p].focal = static_cast<PaperIndex>(p);
    run.results[p].a_index = run.results[p].z_p10 = kNaN;
    run.results[p].flags = kFlagAUndefined;
  }
  for (int year : graph.years()) {
    if (options.year_min && year < *options.year_min) continue;
    if (options.year_max && year > *options.year_max) continue;
    auto stats = pair_zscores(graph, year, options.randomizations, options.seed);
    const auto papers = graph.papers_in_year(year);
    const auto n = static_cast<std::ptrdiff_t>(papers.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const PaperIndex p = papers[static_cast<std::size_t>(i)];
      run.results[p] = a_index(graph, p, stats);
    }
    if (keep_pairs) run.pairs.emplace(year, std::move(stats));
  }
  return run;
}

KnowledgeSpanResult knowledge_span(const CorpusGraph& graph, PaperIndex focal, const EmbeddingStore& field_embeddings,
                                   SpanLabels labels) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  KnowledgeSpanResult res;
  res.focal = focal;
  std::set<std::string> used;
  for (PaperIndex r : graph.references(focal)) {
    const FieldLabel* top = nullptr;
    for (const auto& f : graph.fields(r)) {
      if (f.level != 1) continue;
      if (labels == SpanLabels::kAll) {
        if (field_embeddings.contains(f.label)) used.insert(f.label);
      } else if (!top || f.score > top->score) {
        top = &f;
      }
    }
    if (top && field_embeddings.contains(top->label)) used.insert(top->label);
  }
  res.n_fields = static_cast<std::uint32_t>(used.size());
  if (used.empty()) {
    res.span = kNaN;
    res.flags |= kFlagSpanUndefined;
    return res;
  }
  const std::vector<std::string> keys(used.begin(), used.end());
  double span = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = i + 1; j < keys.size(); ++j) {
      span = std::max(span, 1.0 - cosine(field_embeddings.vector(keys[i]), field_embeddings.vector(keys[j])));
    }
  }
  res.span = span;
  return res;
}

}  // namespace citemetrics

#include "citemetrics/disruption.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <utility>

#include "citemetrics/error.hpp"

namespace citemetrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::pair<Flag, std::string_view>, 10> kFlagNames{{
    {kFlagDUndefined, "d_undefined"},
    {kFlagNoReferences, "no_refs"},
    {kFlagDecompUndefined, "decomp_undefined"},
    {kFlagNoDominantRef, "no_dominant_ref"},
    {kFlagAUndefined, "a_undefined"},
    {kFlagSelfPairsOnly, "self_pairs_only"},
    {kFlagSpanUndefined, "span_undefined"},
    {kFlagTopicMissing, "topicsim_missing"},
    {kFlagTopicRestUndefined, "topicsim_rest_undefined"},
    {kFlagFewerThanK, "fewer_than_k"},
}};

}  // namespace

CitationWindow CitationWindow::fixed(int years) {
  if (years < 1) throw UsageError("citation window horizon must be >= 1 year");
  return {Mode::kFixedYears, years};
}

CitationWindow CitationWindow::parse(std::string_view text) {
  if (text == "all" || text.empty()) return all_time();
  if (text.ends_with("yr")) text.remove_suffix(2);
  int years = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), years);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("bad window '" + std::string(text) + "' (expected all or Nyr)");
  }
  return fixed(years);
}

std::string CitationWindow::to_string() const {
  return mode == Mode::kAllTime ? "all" : std::to_string(horizon) + "yr";
}

std::string flags_to_string(std::uint32_t flags) {
  std::string out;
  for (const auto& [bit, name] : kFlagNames) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

std::uint32_t flags_from_string(std::string_view text) {
  std::uint32_t flags = 0;
  while (!text.empty()) {
    auto bar = text.find('|');
    auto name = text.substr(0, bar);
    bool found = false;
    for (const auto& [bit, n] : kFlagNames) {
      if (n == name) {
        flags |= bit;
        found = true;
      }
    }
    if (!found) throw DataError("unknown flag '" + std::string(name) + "'");
    if (bar == std::string_view::npos) break;
    text.remove_prefix(bar + 1);
  }
  return flags;
}

std::uint32_t DisruptionScratch::next_generation() {
  if (++generation_ == 0) {
    std::fill(citer_mark_.begin(), citer_mark_.end(), 0);
    std::fill(seen_mark_.begin(), seen_mark_.end(), 0);
    generation_ = 1;
  }
  return generation_;
}

struct DisruptionKernel {
  // Walks citers of the focal, then citers of each reference. Each candidate
  // is classified once thanks to the generation-stamped seen marks.
  static void run(const CorpusGraph& g, PaperIndex focal, const CitationWindow& window, DisruptionScratch& s,
                  DisruptionResult& out, CiterSets* sets) {
    const std::uint32_t gen = s.next_generation();
    const int year0 = g.year(focal);

    std::uint32_t n_citers = 0;
    for (PaperIndex x : g.citers(focal)) {
      if (window.admits(year0, g.year(x))) {
        s.citer_mark_[x] = gen;
        ++n_citers;
      }
    }

    std::uint32_t n_b = 0;
    std::uint32_t n_c = 0;
    for (PaperIndex r : g.references(focal)) {
      for (PaperIndex y : g.citers(r)) {
        if (y == focal || s.seen_mark_[y] == gen) continue;
        s.seen_mark_[y] = gen;
        if (s.citer_mark_[y] == gen) {
          ++n_b;
          if (sets) sets->b.push_back(y);
        } else if (g.year(y) > year0 && window.admits(year0, g.year(y))) {
          ++n_c;
          if (sets) sets->c.push_back(y);
        }
      }
    }

    if (sets) {
      for (PaperIndex x : g.citers(focal)) {
        if (s.citer_mark_[x] == gen && s.seen_mark_[x] != gen) sets->a.push_back(x);
      }
      std::sort(sets->b.begin(), sets->b.end());
      std::sort(sets->c.begin(), sets->c.end());
    }

    out.focal = focal;
    out.n_a = n_citers - n_b;
    out.n_b = n_b;
    out.n_c = n_c;
    out.flags = 0;
    if (g.references(focal).empty()) out.flags |= kFlagNoReferences;
    const std::uint32_t denom = out.n_a + out.n_b + out.n_c;
    if (denom == 0) {
      out.d = kNaN;
      out.flags |= kFlagDUndefined;
    } else {
      out.d = (static_cast<double>(out.n_a) - static_cast<double>(out.n_b)) / static_cast<double>(denom);
    }
  }
};

CiterSets classify_citers(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  DisruptionScratch scratch(graph.size());
  CiterSets sets;
  DisruptionResult ignored;
  DisruptionKernel::run(graph, focal, window, scratch, ignored, &sets);
  return sets;
}

std::optional<DominantReference> most_cited_reference(const CorpusGraph& graph, PaperIndex focal) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  std::optional<DominantReference> best;
  for (PaperIndex r : graph.references(focal)) {
    const auto c = static_cast<std::uint32_t>(graph.total_citations(r));
    if (!best) {
      best = DominantReference{r, c};
      continue;
    }
    const PaperIndex cur = best->ref;
    const bool better =
        c > best->citations ||
        (c == best->citations &&
         (graph.year(r) < graph.year(cur) ||
          (graph.year(r) == graph.year(cur) && graph.external_id(r) < graph.external_id(cur))));
    if (better) best = DominantReference{r, c};
  }
  return best;
}

void apply_decomposition(DisruptionResult& result, std::optional<DominantReference> dominant) {
  result.c_p = result.n_a + result.n_b;
  if (dominant) {
    result.dominant_ref = dominant->ref;
    result.c_max = dominant->citations;
  } else {
    result.dominant_ref = kNoPaper;
    result.c_max = 0;
    result.flags |= kFlagNoDominantRef;
  }
  if (result.c_p == 0 || !dominant) {
    result.d_local = result.b_dom = result.d_approx = kNaN;
    result.flags |= kFlagDecompUndefined;
    return;
  }
  const double cp = result.c_p;
  result.d_local = (static_cast<double>(result.n_a) - static_cast<double>(result.n_b)) / cp;
  result.b_dom = static_cast<double>(result.c_max) / cp;
  result.d_approx = result.d_local / (1.0 + result.b_dom);
}

DisruptionResult disruption(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window,
                            DisruptionScratch& scratch) {
  if (focal >= graph.size()) throw DataError("focal index out of range");
  DisruptionResult r;
  DisruptionKernel::run(graph, focal, window, scratch, r, nullptr);
  apply_decomposition(r, most_cited_reference(graph, focal));
  return r;
}

DisruptionResult disruption(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window) {
  DisruptionScratch scratch(graph.size());
  return disruption(graph, focal, window, scratch);
}

std::vector<DisruptionResult> disruption_all(const CorpusGraph& graph, const CitationWindow& window) {
  const auto n = static_cast<std::ptrdiff_t>(graph.size());
  std::vector<DisruptionResult> out(graph.size());
#pragma omp parallel
  {
    DisruptionScratch scratch(graph.size());
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = disruption(graph, static_cast<PaperIndex>(i), window, scratch);
    }
  }
  return out;
}

std::vector<DisruptionResult> disruption_all_serial(const CorpusGraph& graph, const CitationWindow& window) {
  std::vector<DisruptionResult> out;
  out.reserve(graph.size());
  DisruptionScratch scratch(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out.push_back(disruption(graph, static_cast<PaperIndex>(i), window, scratch));
  }
  return out;
}

}  // namespace citemetrics

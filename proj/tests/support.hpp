#pragma once

// Builders and brute-force oracles shared by the test executables. Oracles
// here restate each definition directly over the record lists, without the
// CSR indexes or scratch marks the library uses.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citemetrics/corpus.hpp"
#include "citemetrics/disruption.hpp"
#include "citemetrics/random.hpp"

namespace testing {

using citemetrics::CorpusGraph;
using citemetrics::PaperIndex;
using citemetrics::PaperRecord;

inline PaperRecord rec(std::string id, int year, std::vector<std::string> refs = {},
                       std::optional<std::string> venue = std::nullopt) {
  PaperRecord r;
  r.id = std::move(id);
  r.year = year;
  r.refs = std::move(refs);
  r.venue = std::move(venue);
  return r;
}

inline CorpusGraph graph_of(std::vector<PaperRecord> records) {
  return citemetrics::build_graph(std::move(records), citemetrics::DomainMap{});
}

/// Arbitrary digraph: any paper may cite any other (cycles, citations to
/// later papers and same-year citations all allowed).
inline std::vector<PaperRecord> random_digraph(std::size_t n, double p, std::uint64_t seed, int year_span = 6) {
  citemetrics::Rng rng(seed);
  std::vector<PaperRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(rec("p" + std::to_string(i), 2000 + static_cast<int>(rng.below(static_cast<std::uint64_t>(year_span)))));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && rng.bernoulli(p)) out[i].refs.push_back(out[j].id);
    }
  }
  return out;
}

struct OracleSets {
  std::set<std::string> a, b, c;
};

/// Direct reading of the type a/b/c definitions: for every paper X, look at
/// X's reference list and the focal's reference list.
inline OracleSets oracle_classify(const std::vector<PaperRecord>& records, const std::string& focal,
                                  const citemetrics::CitationWindow& window) {
  const PaperRecord* f = nullptr;
  for (const auto& r : records) {
    if (r.id == focal) f = &r;
  }
  OracleSets s;
  if (!f) return s;
  for (const auto& x : records) {
    if (x.id == focal) continue;
    if (!window.admits(f->year, x.year)) continue;
    bool cites_focal = false;
    bool cites_ref = false;
    for (const auto& xr : x.refs) {
      if (xr == focal) cites_focal = true;
      for (const auto& fr : f->refs) {
        if (xr == fr && fr != focal) cites_ref = true;
      }
    }
    if (cites_focal && !cites_ref) s.a.insert(x.id);
    if (cites_focal && cites_ref) s.b.insert(x.id);
    if (!cites_focal && cites_ref && x.year > f->year) s.c.insert(x.id);
  }
  return s;
}

/// Records as the library sees them after normalization: duplicate refs,
/// self refs and refs to unknown ids dropped.
inline std::vector<PaperRecord> normalized(std::vector<PaperRecord> records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.id);
  for (auto& r : records) {
    std::vector<std::string> kept;
    std::set<std::string> seen;
    for (const auto& ref : r.refs) {
      if (ref == r.id || !ids.count(ref) || !seen.insert(ref).second) continue;
      kept.push_back(ref);
    }
    r.refs = kept;
  }
  return records;
}

using VenuePair = std::pair<std::string, std::string>;

inline VenuePair venue_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

/// Venue-pair counts over every pair of reference positions, by direct
/// double loop over each reference list given as venue names.
inline std::map<VenuePair, std::int64_t> oracle_pair_counts(const std::vector<std::vector<std::string>>& ref_venues) {
  std::map<VenuePair, std::int64_t> out;
  for (const auto& list : ref_venues) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) ++out[venue_pair(list[i], list[j])];
    }
  }
  return out;
}

struct ExactMoments {
  double mean = 0.0;
  double var = 0.0;  // population variance over all permutations
  double mu4 = 0.0;  // fourth central moment
};

/// Exact null distribution of every venue-pair count for the papers of
/// `year`: enumerates every permutation of cited endpoints within each
/// cited-year stratum, each equally likely.
inline std::map<VenuePair, ExactMoments> exhaustive_pair_moments(const std::vector<PaperRecord>& records, int year) {
  std::map<std::string, const PaperRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<std::size_t> degree;
  std::vector<std::string> slots;  // cited ids in citing order
  for (const auto& r : records) {
    if (r.year != year) continue;
    degree.push_back(r.refs.size());
    for (const auto& ref : r.refs) slots.push_back(ref);
  }
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < slots.size(); ++i) strata[by_id.at(slots[i])->year].push_back(i);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [y, g] : strata) groups.push_back(g);

  std::vector<std::map<VenuePair, std::int64_t>> outcomes;
  std::vector<std::string> current = slots;
  std::vector<std::vector<std::size_t>> perms(groups.size());
  auto emit = [&] {
    std::vector<std::vector<std::string>> lists;
    std::size_t at = 0;
    for (std::size_t d : degree) {
      std::vector<std::string> v;
      for (std::size_t k = 0; k < d; ++k) {
        const auto& venue = by_id.at(current[at + k])->venue;
        if (venue) v.push_back(*venue);
      }
      at += d;
      lists.push_back(v);
    }
    outcomes.push_back(oracle_pair_counts(lists));
  };
  auto recurse = [&](auto& self, std::size_t gi) -> void {
    if (gi == groups.size()) {
      emit();
      return;
    }
    const auto& g = groups[gi];
    std::vector<std::size_t> perm(g.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    do {
      for (std::size_t i = 0; i < g.size(); ++i) current[g[i]] = slots[g[perm[i]]];
      self(self, gi + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  recurse(recurse, 0);

  std::set<VenuePair> keys;
  for (const auto& o : outcomes) {
    for (const auto& [k, c] : o) keys.insert(k);
  }
  std::map<VenuePair, ExactMoments> out;
  const double n = static_cast<double>(outcomes.size());
  for (const auto& k : keys) {
    double sum = 0.0;
    for (const auto& o : outcomes) {
      auto it = o.find(k);
      sum += it == o.end() ? 0.0 : static_cast<double>(it->second);
    }
    ExactMoments m;
    m.mean = sum / n;
    for (const auto& o : outcomes) {
      auto it = o.find(k);
      const double d = (it == o.end() ? 0.0 : static_cast<double>(it->second)) - m.mean;
      m.var += d * d / n;
      m.mu4 += d * d * d * d / n;
    }
    out[k] = m;
  }
  return out;
}

inline std::set<std::string> ids_of(const CorpusGraph& g, const std::vector<PaperIndex>& v) {
  std::set<std::string> out;
  for (PaperIndex p : v) out.insert(g.external_id(p));
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("citemetrics_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing

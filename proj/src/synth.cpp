#include "citemetrics/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "citemetrics/csv.hpp"
#include "citemetrics/error.hpp"
#include "citemetrics/random.hpp"

namespace citemetrics::synth {

namespace {

std::string pad_id(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06zu", prefix, n);
  return buf;
}

void write_pairs(const std::filesystem::path& path, const char* header,
                 const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << header << '\n';
  for (const auto& [a, b] : rows) out << csv_escape(a) << ',' << csv_escape(b) << '\n';
}

constexpr std::array<const char*, 8> kFieldNames{"Physics", "Biology", "Sociology", "History",
                                                 "Chemistry", "Economics", "Philosophy", "Medicine"};
constexpr std::array<const char*, 8> kFieldDomains{"Science & Engineering", "Science & Engineering",
                                                   "Social Sciences",       "Arts & Humanities",
                                                   "Science & Engineering", "Social Sciences",
                                                   "Arts & Humanities",     "Science & Engineering"};

std::vector<double> unit_noise(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace

DomainMap SyntheticCorpus::domain_map() const {
  DomainMap m;
  for (const auto& [label, domain] : domain_rows) m.add(label, parse_domain(domain));
  return m;
}

std::unordered_map<std::string, std::string> SyntheticCorpus::label_map() const {
  return {labels.begin(), labels.end()};
}

std::size_t SyntheticCorpus::edge_count() const {
  std::size_t e = 0;
  for (const auto& r : records) e += r.refs.size();
  return e;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "corpus.jsonl", std::ios::binary);
    if (!out) throw DataError("cannot write corpus.jsonl in " + dir.string());
    for (const auto& r : corpus.records) out << to_json_line(r) << '\n';
  }
  write_pairs(dir / "domains.csv", "label,domain", corpus.domain_rows);
  if (!corpus.labels.empty()) write_pairs(dir / "labels.csv", "id,label", corpus.labels);
  if (!corpus.nominations.empty()) write_pairs(dir / "nominations.csv", "id,class", corpus.nominations);
  if (corpus.paper_embeddings) {
    std::ofstream out(dir / "paper_embeddings.csv", std::ios::binary);
    corpus.paper_embeddings->write_csv(out);
  }
  if (corpus.field_embeddings) {
    std::ofstream out(dir / "field_embeddings.csv", std::ios::binary);
    corpus.field_embeddings->write_csv(out);
  }
}

SyntheticCorpus random_corpus(const RandomOptions& o) {
  if (o.papers == 0 || o.venues == 0 || o.year_to < o.year_from) throw UsageError("bad random corpus options");
  SyntheticCorpus c;
  Rng rng(o.seed);
  c.domain_rows = {{"Physics", "Science & Engineering"}, {"Sociology", "Social Sciences"}, {"History", "Arts & Humanities"}};
  const std::array<const char*, 3> level0{"Physics", "Sociology", "History"};

  const auto span = static_cast<std::size_t>(o.year_to - o.year_from + 1);
  std::vector<PaperIndex> edge_targets;  // endpoints of all edges so far, for copying
  edge_targets.reserve(static_cast<std::size_t>(o.mean_refs * static_cast<double>(o.papers)));
  std::vector<std::size_t> chosen;
  std::set<std::size_t> seen;
  c.records.reserve(o.papers);
  for (std::size_t i = 0; i < o.papers; ++i) {
    PaperRecord r;
    r.id = pad_id("P", i);
    r.year = o.year_from + static_cast<int>(i * span / o.papers);
    r.venue = "V" + std::to_string(rng.below(o.venues));
    r.n_authors = 1 + static_cast<int>(rng.below(8));
    r.fields.push_back({level0[rng.below(level0.size())], 0, 0.5 + 0.5 * rng.uniform()});
    if (i > 0) {
      // Geometric-ish spread around the mean, capped by available papers.
      const auto want = std::min<std::size_t>(i, static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(2.0 * o.mean_refs) + 1)));
      seen.clear();
      chosen.clear();
      for (std::size_t attempt = 0; chosen.size() < want && attempt < 4 * want + 8; ++attempt) {
        std::size_t t;
        if (!edge_targets.empty() && rng.bernoulli(o.preferential)) {
          t = edge_targets[rng.below(edge_targets.size())];
        } else {
          t = rng.below(i);
        }
        if (seen.insert(t).second) chosen.push_back(t);
      }
      for (std::size_t t : chosen) {
        r.refs.push_back(pad_id("P", t));
        edge_targets.push_back(static_cast<PaperIndex>(t));
      }
    }
    c.records.push_back(std::move(r));
  }
  return c;
}

SyntheticCorpus innovation_corpus(const InnovationOptions& o) {
  if (o.fields < 2 || o.fields > kFieldNames.size()) throw UsageError("innovation corpus needs 2..8 fields");
  if (o.journals_per_field == 0 || o.pool_per_field < 12 || o.focal_per_year == 0) {
    throw UsageError("bad innovation corpus options");
  }
  SyntheticCorpus c;
  Rng rng(o.seed);
  constexpr std::size_t kDim = 8;
  constexpr std::size_t kSubfields = 3;

  for (std::size_t f = 0; f < o.fields; ++f) c.domain_rows.emplace_back(kFieldNames[f], kFieldDomains[f]);

  // Field directions for embeddings: axis f, plus a shared offset so that
  // vectors are never orthogonal by construction alone.
  auto field_axis = [&](std::size_t f) {
    std::vector<double> v(kDim, 0.05);
    v[f % kDim] += 1.0;
    return v;
  };
  EmbeddingStore field_emb(kDim);
  for (std::size_t f = 0; f < o.fields; ++f) {
    for (std::size_t s = 0; s < kSubfields; ++s) {
      auto v = field_axis(f);
      auto noise = unit_noise(rng, kDim, 0.3);
      for (std::size_t i = 0; i < kDim; ++i) v[i] += noise[i];
      field_emb.add(std::string(kFieldNames[f]) + "/" + std::to_string(s), v);
    }
  }
  EmbeddingStore paper_emb(kDim);

  std::size_t counter = 0;
  auto journal = [&](std::size_t f) {
    return std::string("J") + std::to_string(f) + "." + std::to_string(rng.below(o.journals_per_field));
  };
  auto make_fields = [&](std::size_t f) {
    std::vector<FieldLabel> fl;
    fl.push_back({kFieldNames[f], 0, 0.6 + 0.4 * rng.uniform()});
    fl.push_back({std::string(kFieldNames[f]) + "/" + std::to_string(rng.below(kSubfields)), 1, 0.5 + 0.5 * rng.uniform()});
    if (rng.bernoulli(0.3)) {
      fl.push_back({std::string(kFieldNames[f]) + "/" + std::to_string(rng.below(kSubfields)), 1, 0.4 * rng.uniform()});
    }
    return fl;
  };
  auto add_embedding = [&](const std::string& id, std::size_t home, std::size_t other, double mix) {
    auto v = field_axis(home);
    auto w = field_axis(other);
    auto noise = unit_noise(rng, kDim, 0.15);
    for (std::size_t i = 0; i < kDim; ++i) v[i] = (1.0 - mix) * v[i] + mix * w[i] + noise[i];
    paper_emb.add(id, v);
  };

  // Reference pool: older papers, spread over five years, no references.
  std::vector<std::vector<std::string>> pool(o.fields);
  for (std::size_t f = 0; f < o.fields; ++f) {
    for (std::size_t i = 0; i < o.pool_per_field; ++i) {
      PaperRecord r;
      r.id = pad_id("R", counter++);
      r.year = o.base_year + static_cast<int>(i % 5);
      r.venue = journal(f);
      r.fields = make_fields(f);
      r.n_authors = 1 + static_cast<int>(rng.below(6));
      add_embedding(r.id, f, f, 0.0);
      pool[f].push_back(r.id);
      c.records.push_back(std::move(r));
    }
  }

  std::vector<PaperRecord> later;  // citers, appended after focal papers
  std::size_t citer_counter = 0;
  std::vector<std::pair<double, std::string>> by_mix;

  auto emit_focal = [&](const std::string& id, int year, std::size_t home, double mix,
                        const std::optional<std::string>& version_of) {
    PaperRecord r;
    r.id = id;
    r.year = year;
    r.venue = journal(home);
    r.fields = make_fields(home);
    r.n_authors = 1 + static_cast<int>(rng.below(8));
    r.version_of = version_of;
    const std::size_t n_refs = 8 + rng.below(5);
    std::set<std::string> refs;
    std::size_t other_field = home;
    while (refs.size() < n_refs) {
      std::size_t f = home;
      if (rng.bernoulli(mix)) {
        f = (home + 1 + rng.below(o.fields - 1)) % o.fields;
        other_field = f;
      }
      refs.insert(pool[f][rng.below(pool[f].size())]);
    }
    r.refs.assign(refs.begin(), refs.end());
    add_embedding(r.id, home, other_field, 0.5 * mix);

    const double q = 0.1 + 0.8 * mix;
    const std::size_t n_cit = 5 + rng.below(21);
    FocalTruth truth;
    truth.id = id;
    truth.mix = mix;
    for (std::size_t k = 0; k < n_cit; ++k) {
      PaperRecord citer;
      citer.id = pad_id("C", citer_counter++);
      citer.year = year + 1 + static_cast<int>(rng.below(8));
      citer.venue = journal(home);
      citer.fields = make_fields(home);
      citer.n_authors = 1 + static_cast<int>(rng.below(8));
      citer.refs.push_back(id);
      if (rng.bernoulli(q)) {
        citer.refs.push_back(r.refs[rng.below(r.refs.size())]);
        ++truth.n_b;
      } else {
        ++truth.n_a;
      }
      later.push_back(std::move(citer));
    }
    const std::size_t n_c = rng.below(6);
    for (std::size_t k = 0; k < n_c; ++k) {
      PaperRecord citer;
      citer.id = pad_id("C", citer_counter++);
      citer.year = year + 1 + static_cast<int>(rng.below(8));
      citer.venue = journal(home);
      citer.fields = make_fields(home);
      citer.refs.push_back(r.refs[rng.below(r.refs.size())]);
      later.push_back(std::move(citer));
    }
    by_mix.emplace_back(mix, id);
    c.focal.push_back(std::move(truth));
    c.records.push_back(std::move(r));
  };

  std::size_t focal_counter = 0;
  std::size_t version_counter = 0;
  for (std::size_t y = 0; y < o.focal_years; ++y) {
    const int year = o.base_year + 10 + static_cast<int>(y);
    for (std::size_t i = 0; i < o.focal_per_year; ++i) {
      const std::size_t home = rng.below(o.fields);
      const double u = rng.uniform();
      const double mix = u * u;  // conventional papers dominate the population
      const std::string id = pad_id("F", focal_counter++);
      emit_focal(id, year, home, mix, std::nullopt);
      if (y + 1 < o.focal_years && rng.bernoulli(o.version_fraction)) {
        const double mix2 = std::clamp(mix + 0.4 * (rng.uniform() - 0.5), 0.0, 1.0);
        emit_focal(pad_id("W", version_counter++), year + 1, home, mix2, id);
      }
    }
  }
  for (auto& r : later) c.records.push_back(std::move(r));

  // Labels: recombination-heavy focal papers read as theory, displacement-heavy
  // as method. Nominations take the extremes of the mix distribution.
  std::sort(by_mix.begin(), by_mix.end());
  for (const auto& [mix, id] : by_mix) {
    const char* label = mix > 0.45 ? "theory" : (mix < 0.15 ? "method" : "finding");
    c.labels.emplace_back(id, label);
  }
  std::sort(c.labels.begin(), c.labels.end());
  const std::size_t n_nom = std::max<std::size_t>(2, by_mix.size() / 10);
  for (std::size_t i = 0; i < n_nom && i < by_mix.size(); ++i) c.nominations.emplace_back(by_mix[i].second, "disruptive");
  for (std::size_t i = 0; i < n_nom && i < by_mix.size(); ++i) {
    c.nominations.emplace_back(by_mix[by_mix.size() - 1 - i].second, "consolidating");
  }
  std::sort(c.nominations.begin(), c.nominations.end());

  c.paper_embeddings = std::move(paper_emb);
  c.field_embeddings = std::move(field_emb);
  return c;
}

SyntheticCorpus cluster_corpus(const ClusterOptions& o) {
  if (o.max_a < o.min_a || o.max_b < o.min_b || o.max_c < o.min_c) throw UsageError("bad cluster ranges");
  SyntheticCorpus c;
  Rng rng(o.seed);
  c.domain_rows = {{"Physics", "Science & Engineering"}};
  constexpr std::size_t kDim = 4;
  EmbeddingStore emb(kDim);

  std::size_t citer_counter = 0;
  for (std::size_t j = 0; j < o.focal; ++j) {
    FocalTruth t;
    t.id = pad_id("F", j);
    t.dominant_ref = pad_id("D", j);
    t.n_a = static_cast<std::uint32_t>(rng.between(o.min_a, o.max_a));
    t.n_b = static_cast<std::uint32_t>(rng.between(o.min_b, o.max_b));
    t.n_c = static_cast<std::uint32_t>(rng.between(o.min_c, o.max_c));
    if (t.n_a + t.n_b == 0) t.n_a = 1;

    auto base = [&](const std::string& id, int year) {
      PaperRecord r;
      r.id = id;
      r.year = year;
      r.venue = "J" + std::to_string(rng.below(5));
      r.fields = {{"Physics", 0, 1.0}};
      r.n_authors = 1 + static_cast<int>(rng.below(6));
      return r;
    };

    c.records.push_back(base(t.dominant_ref, o.base_year - 5));
    PaperRecord focal = base(t.id, o.base_year);
    focal.refs.push_back(t.dominant_ref);
    for (std::size_t m = 0; m < o.minor_refs; ++m) {
      const std::string minor = pad_id("M", j * o.minor_refs + m);
      c.records.push_back(base(minor, o.base_year - 3));
      focal.refs.push_back(minor);
      if (o.plant_similarity) emb.add(minor, unit_noise(rng, kDim, 1.0));
    }
    c.records.push_back(std::move(focal));

    auto citer = [&](std::vector<std::string> refs) {
      PaperRecord r = base(pad_id("C", citer_counter++), o.base_year + 1 + static_cast<int>(rng.below(10)));
      r.refs = std::move(refs);
      c.records.push_back(std::move(r));
    };
    for (std::uint32_t k = 0; k < t.n_a; ++k) citer({t.id});
    for (std::uint32_t k = 0; k < t.n_b; ++k) citer({t.id, t.dominant_ref});
    for (std::uint32_t k = 0; k < t.n_c; ++k) citer({t.dominant_ref});

    if (o.plant_similarity) {
      const double d = (static_cast<double>(t.n_a) - t.n_b) / static_cast<double>(t.n_a + t.n_b + t.n_c);
      const double s = std::clamp(0.5 + 0.35 * std::fabs(d) + o.similarity_noise * (2.0 * rng.uniform() - 1.0), -1.0, 1.0);
      t.planted_similarity = s;
      const std::vector<double> dom{1.0, 0.0, 0.0, 0.0};
      const std::vector<double> foc{s, std::sqrt(1.0 - s * s), 0.0, 0.0};
      emb.add(t.dominant_ref, dom);
      emb.add(t.id, foc);
    }
    c.focal.push_back(std::move(t));
  }
  if (o.plant_similarity) c.paper_embeddings = std::move(emb);
  return c;
}

}  // namespace citemetrics::synth

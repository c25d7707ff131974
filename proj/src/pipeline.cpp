#include "citemetrics/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "citemetrics/error.hpp"
#include "citemetrics/random.hpp"
#include "citemetrics/regression.hpp"
#include "citemetrics/stats.hpp"

namespace citemetrics {

namespace {

using nlohmann::json;

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

template <typename T>
void take(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string real(std::optional<double> v) { return format_real(v); }
std::string real(double v) { return format_real(v); }
std::string integer(std::size_t v) { return std::to_string(v); }

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path)) throw DataError(std::string(what) + " not found: " + path);
}

std::vector<std::string> fit_cells(const std::optional<stats::LineFit>& fit) {
  if (!fit) return {"", "", "", "", ""};
  return {real(fit->slope), real(fit->intercept), real(fit->r2), real(fit->slope_se), real(fit->p_value)};
}

// Pairs of defined (x, y) values, optionally restricted to a row subset.
void defined_pairs(const std::vector<std::optional<double>>& x, const std::vector<std::optional<double>>& y,
                   const std::vector<std::size_t>& rows, std::vector<double>& xs, std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  for (std::size_t i : rows) {
    if (x[i] && y[i] && std::isfinite(*x[i]) && std::isfinite(*y[i])) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    }
  }
}

std::optional<stats::BinnedTrend> try_trend(const std::vector<double>& x, const std::vector<double>& y,
                                            std::size_t bins) {
  try {
    return stats::binned_trend(x, y, bins);
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

double jaccard_strings(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& s : a) inter += b.count(s);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::set<std::string> level1_labels(const CorpusGraph& graph, PaperIndex p) {
  std::set<std::string> out;
  for (const auto& f : graph.fields(p)) {
    if (f.level == 1) out.insert(f.label);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known{
      "corpus",      "domains",    "require",     "strict",        "window",      "randomizations", "seed",
      "year_min",    "year_max",   "thresholds",  "paper_embeddings", "field_embeddings", "span_labels",
      "centroid",    "labels",     "nominations", "regression",    "analyses",    "k",              "decades",
      "bins",        "bootstrap",  "sbi_horizon", "sbi_top",       "min_citations", "out_dir",      "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw UsageError("config: unknown key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("corpus")) {
      if (j["corpus"].is_string()) {
        c.corpus = {j["corpus"].get<std::string>()};
      } else {
        c.corpus = j["corpus"].get<std::vector<std::string>>();
      }
    }
    take(j, "domains", c.domains);
    take(j, "require", c.require);
    take(j, "strict", c.strict);
    take(j, "window", c.window);
    take(j, "randomizations", c.randomizations);
    take(j, "seed", c.seed);
    take(j, "year_min", c.year_min);
    take(j, "year_max", c.year_max);
    take(j, "thresholds", c.thresholds);
    take(j, "paper_embeddings", c.paper_embeddings);
    take(j, "field_embeddings", c.field_embeddings);
    take(j, "span_labels", c.span_labels);
    take(j, "centroid", c.centroid);
    take(j, "labels", c.labels);
    take(j, "nominations", c.nominations);
    take(j, "regression", c.regression);
    take(j, "analyses", c.analyses);
    take(j, "k", c.k);
    if (j.contains("decades")) {
      const auto& d = j["decades"];
      take(d, "from", c.decades.from);
      take(d, "to", c.decades.to);
      take(d, "step", c.decades.step);
    }
    take(j, "bins", c.bins);
    take(j, "bootstrap", c.bootstrap);
    take(j, "sbi_horizon", c.sbi_horizon);
    take(j, "sbi_top", c.sbi_top);
    take(j, "min_citations", c.min_citations);
    take(j, "out_dir", c.out_dir);
    take(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  for (auto& p : c.corpus) p = resolve(p, base_dir);
  for (auto* p : {&c.domains, &c.paper_embeddings, &c.field_embeddings, &c.labels, &c.nominations, &c.regression,
                  &c.out_dir}) {
    *p = resolve(*p, base_dir);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

std::string RunConfig::canonical_json() const {
  // Input files are named by their file name only so relocating a tree does
  // not change the hash.
  auto name = [](const std::string& p) { return p.empty() ? p : std::filesystem::path(p).filename().string(); };
  json j;
  std::vector<std::string> corpus_names;
  for (const auto& p : corpus) corpus_names.push_back(name(p));
  j["corpus"] = corpus_names;
  j["domains"] = name(domains);
  j["require"] = require;
  j["strict"] = strict;
  j["window"] = window;
  j["randomizations"] = randomizations;
  j["seed"] = seed;
  j["year_min"] = year_min ? json(*year_min) : json(nullptr);
  j["year_max"] = year_max ? json(*year_max) : json(nullptr);
  j["thresholds"] = thresholds;
  j["paper_embeddings"] = name(paper_embeddings);
  j["field_embeddings"] = name(field_embeddings);
  j["span_labels"] = span_labels;
  j["centroid"] = centroid;
  j["labels"] = name(labels);
  j["nominations"] = name(nominations);
  j["regression"] = name(regression);
  j["analyses"] = analyses;
  j["k"] = k;
  j["decades"] = {{"from", decades.from}, {"to", decades.to}, {"step", decades.step}};
  j["bins"] = bins;
  j["bootstrap"] = bootstrap;
  j["sbi_horizon"] = sbi_horizon ? json(*sbi_horizon) : json(nullptr);
  j["sbi_top"] = sbi_top;
  j["min_citations"] = min_citations;
  return j.dump();
}

Provenance RunConfig::provenance() const { return {canonical_json()}; }

bool RunConfig::wants(std::string_view analysis) const {
  return std::find(analyses.begin(), analyses.end(), analysis) != analyses.end();
}

const std::vector<std::string>& analysis_names() {
  static const std::vector<std::string> names{"pairs",     "span",     "topicsim", "sbi",    "trend",
                                              "conservation", "shares", "dominance", "versions", "regress",
                                              "auc",       "labels"};
  return names;
}

// ---------------------------------------------------------------------------
// Inputs

CorpusGraph load_corpus(const RunConfig& config, IngestReport* report) {
  if (config.corpus.empty()) throw UsageError("no corpus files given");
  std::vector<std::filesystem::path> paths(config.corpus.begin(), config.corpus.end());
  for (const auto& p : paths) require_file(p.string(), "corpus file");
  DomainMap domains;
  if (!config.domains.empty()) {
    require_file(config.domains, "domain map");
    domains = DomainMap::load(config.domains);
  }
  IngestOptions opts;
  opts.strict = config.strict;
  opts.require = RequireFilter::parse(config.require);
  return ingest(paths, domains, opts, report);
}

std::unordered_map<std::string, std::string> read_id_classes(const std::filesystem::path& path,
                                                             const std::vector<std::string>& allowed) {
  const CsvTable t = read_csv_file(path);
  std::unordered_map<std::string, std::string> out;
  auto take_row = [&](const std::vector<std::string>& row, std::size_t line) {
    if (row.size() < 2) throw DataError(path.string() + ":" + std::to_string(line) + ": expected id,class");
    if (std::find(allowed.begin(), allowed.end(), row[1]) == allowed.end()) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": unknown class '" + row[1] + "'");
    }
    out[row[0]] = row[1];
  };
  // read_csv treats the first non-comment line as the header.
  if (!t.header.empty() && t.header[0] != "id") take_row(t.header, 1);
  for (std::size_t i = 0; i < t.rows.size(); ++i) take_row(t.rows[i], i + 2);
  return out;
}

std::unordered_map<std::string, std::string> read_labels(const std::filesystem::path& path) {
  return read_id_classes(path, {"theory", "method", "finding"});
}

std::unordered_map<std::string, std::string> read_nominations(const std::filesystem::path& path) {
  return read_id_classes(path, {"disruptive", "consolidating"});
}

LabelJoin join_labels(MetricTable& table, const std::unordered_map<std::string, std::string>& labels) {
  LabelJoin j;
  for (const auto& [id, label] : labels) {
    if (MetricRow* row = table.find(id)) {
      row->label = label;
      ++j.matched;
    } else {
      ++j.unmatched;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Metrics

MetricTable compute_metrics(const CorpusGraph& graph, const RunConfig& config, const MetricStages& stages,
                            const MetricInputs& inputs, NoveltyRun* novelty_out) {
  const CitationWindow window = CitationWindow::parse(config.window);
  if (stages.span && !inputs.field_embeddings) throw UsageError("knowledge span needs field embeddings");
  if (stages.topicsim && !inputs.paper_embeddings) throw UsageError("topic similarity needs paper embeddings");
  const SpanLabels span_mode = config.span_labels == "all" ? SpanLabels::kAll : SpanLabels::kTopConfidence;
  if (config.span_labels != "all" && config.span_labels != "top") throw UsageError("span_labels must be top or all");
  if (config.centroid != "mean" && config.centroid != "normalized") {
    throw UsageError("centroid must be mean or normalized");
  }
  const CentroidMode centroid = config.centroid == "normalized" ? CentroidMode::kNormalizedMean : CentroidMode::kMean;

  const auto dis = disruption_all(graph, window);
  NoveltyRun nov;
  if (stages.novelty) {
    NoveltyOptions o;
    o.randomizations = config.randomizations;
    o.seed = config.seed;
    o.year_min = config.year_min;
    o.year_max = config.year_max;
    nov = novelty_all(graph, o, novelty_out != nullptr);
  }
  const auto years = graph.years();
  const int horizon = config.sbi_horizon.value_or(years.empty() ? 0 : years.back());

  std::vector<MetricRow> rows(graph.size());
  const auto n = static_cast<std::ptrdiff_t>(graph.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto p = static_cast<PaperIndex>(i);
    MetricRow& r = rows[static_cast<std::size_t>(i)];
    r.id = graph.external_id(p);
    r.year = graph.year(p);
    if (graph.domain(p) != Domain::kUnknown) r.domain = std::string(to_string(graph.domain(p)));
    r.field = graph.primary_field(p);
    r.team_band = team_size_band(graph.author_count(p));
    r.citations = static_cast<std::int64_t>(graph.total_citations(p));
    r.n_refs = static_cast<std::int64_t>(graph.references(p).size());

    const DisruptionResult& d = dis[p];
    r.n_a = d.n_a;
    r.n_b = d.n_b;
    r.n_c = d.n_c;
    if (d.d_defined()) r.d_index = d.d;
    if (d.dominant_ref != kNoPaper) {
      r.dominant_ref = graph.external_id(d.dominant_ref);
      r.c_max = d.c_max;
      r.field_overlap = jaccard_strings(level1_labels(graph, p), level1_labels(graph, d.dominant_ref));
      r.cite_diff = static_cast<std::int64_t>(d.c_max) - static_cast<std::int64_t>(graph.total_citations(p));
      r.year_diff = graph.year(p) - graph.year(d.dominant_ref);
    }
    if (d.decomposition_defined()) {
      r.d_local = d.d_local;
      r.b_dom = d.b_dom;
      r.d_approx = d.d_approx;
    }
    r.flags = d.flags;

    if (stages.novelty) {
      const NoveltyResult& a = nov.results[p];
      r.n_pairs = a.n_pairs;
      if (a.defined()) r.a_index = a.a_index;
      r.flags |= a.flags;
    }
    if (stages.sbi) {
      const auto h = citation_history(graph, p, horizon);
      if (!h.counts.empty()) {
        const auto s = sbi(h.counts);
        r.sbi = s.b;
        r.t_m = s.t_m;
      }
    }
    if (stages.span) {
      const auto s = knowledge_span(graph, p, *inputs.field_embeddings, span_mode);
      r.n_fields = s.n_fields;
      if (!(s.flags & kFlagSpanUndefined)) r.span = s.span;
      r.flags |= s.flags;
    }
    if (stages.topicsim && d.dominant_ref != kNoPaper &&
        graph.total_citations(p) >= static_cast<std::size_t>(std::max(0, config.min_citations))) {
      const auto t = topic_similarity(graph, p, *inputs.paper_embeddings, d.dominant_ref, centroid);
      r.sim_focal_dom = t.sim_focal_dom;
      r.sim_dom_rest = t.sim_dom_rest;
      r.n_rest = t.n_rest;
      r.flags |= t.flags;
    }
  }
  if (novelty_out) *novelty_out = std::move(nov);
  return MetricTable(std::move(rows));
}

// ---------------------------------------------------------------------------
// Analysis writers

void write_pairs_csv(std::ostream& out, const CorpusGraph& graph, const std::map<int, PairStatsMap>& pairs,
                     const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"year", "venue_m", "venue_n", "obs", "exp", "sigma", "z"});
  for (const auto& [year, stats] : pairs) {
    std::vector<const JournalPairStats*> sorted;
    for (const auto& [key, s] : stats) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [&](const auto* a, const auto* b) {
      const auto& am = graph.venue_name(a->m);
      const auto& bm = graph.venue_name(b->m);
      if (am != bm) return am < bm;
      return graph.venue_name(a->n) < graph.venue_name(b->n);
    });
    for (const auto* s : sorted) {
      w.row({std::to_string(year), graph.venue_name(s->m), graph.venue_name(s->n), std::to_string(s->obs),
             real(s->exp), real(s->sigma), real(s->z)});
    }
  }
}

void write_trend(std::ostream& bins_out, std::ostream& fits_out, const MetricTable& table, std::string_view x,
                 std::string_view y, const std::vector<std::string>& group_by, std::size_t bins,
                 std::int64_t min_citations, const Provenance* prov) {
  const auto xv = table.numeric(x);
  const auto cites = table.numeric("citations");
  const auto yv = table.numeric(y);
  CsvWriter wb(bins_out, prov);
  CsvWriter wf(fits_out, prov);
  wb.header({"group_by", "group", "bin", "x_mean", "y_mean", "n"});
  wf.header({"group_by", "group", "x", "y", "n", "bins", "slope", "intercept", "r2", "slope_se", "p_value"});

  auto emit = [&](const std::string& by, const std::string& group, std::vector<std::size_t> rows) {
    std::erase_if(rows, [&](std::size_t i) { return !cites[i] || *cites[i] < static_cast<double>(min_citations); });
    std::vector<double> xs, ys;
    defined_pairs(xv, yv, rows, xs, ys);
    const auto trend = try_trend(xs, ys, bins);
    std::optional<stats::LineFit> fit;
    if (trend) {
      fit = trend->fit;
      for (std::size_t b = 0; b < trend->bins.size(); ++b) {
        const auto& bin = trend->bins[b];
        wb.row({by, group, integer(b + 1), real(bin.x_mean), real(bin.y_mean), integer(bin.n)});
      }
    }
    std::vector<std::string> cells{by, group, std::string(x), std::string(y), integer(xs.size()), integer(bins)};
    for (auto& c : fit_cells(fit)) cells.push_back(std::move(c));
    wf.row(cells);
  };

  emit("all", "all", all_rows(table.size()));
  for (const auto& by : group_by) {
    const auto levels = table.factor(by);
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i]) groups[*levels[i]].push_back(i);
    }
    for (const auto& [level, rows] : groups) emit(by, level, rows);
  }
}

void write_conservation(std::ostream& out, const MetricTable& table,
                        const std::vector<std::pair<std::string, Thresholds>>& sets, const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"threshold", "theta_d", "theta_a", "year", "papers", "above_d", "above_a"});
  std::optional<int> ymin, ymax;
  for (const auto& r : table.rows()) {
    ymin = ymin ? std::min(*ymin, r.year) : r.year;
    ymax = ymax ? std::max(*ymax, r.year) : r.year;
  }
  for (const auto& [name, thr] : sets) {
    for (const auto& c : conservation_counts(table, thr, ymin, ymax)) {
      w.row({name, real(thr.d), real(thr.a), std::to_string(c.year), integer(c.papers), integer(c.above_d),
             integer(c.above_a)});
    }
  }
}

void write_shares(std::ostream& out, const MetricTable& table, const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"group_by", "group", "year", "n_d", "share_d", "n_a", "share_a"});
  auto emit = [&](const std::string& by, const std::string& group, const std::vector<YearShare>& shares) {
    for (const auto& s : shares) {
      w.row({by, group, std::to_string(s.year), integer(s.n_d), real(s.share_d), integer(s.n_a), real(s.share_a)});
    }
  };
  emit("all", "all", share_trends(table));
  for (const auto& [level, shares] : share_trends_by(table, "domain")) emit("domain", level, shares);
}

void write_sbi_compare(std::ostream& out, const MetricTable& table, double top_fraction, int resamples,
                       std::uint64_t seed, const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"group_by", "group", "set", "threshold", "n", "mean_sbi", "ci_lo", "ci_hi"});
  const Thresholds thr = empirical_thresholds(table, top_fraction);
  const auto domains = table.factor("domain");
  std::map<std::string, std::vector<std::size_t>> strata;
  strata["all"] = all_rows(table.size());
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i]) strata[*domains[i]].push_back(i);
  }
  const stats::Statistic mean = [](std::span<const double> v) { return stats::mean(v); };
  std::uint64_t stream = 0;
  for (const auto& [group, rows] : strata) {
    struct Set {
      const char* name;
      std::optional<double> threshold;
      std::vector<double> values;
    };
    std::array<Set, 3> sets{Set{"all", std::nullopt, {}}, Set{"novel", thr.a, {}}, Set{"disruptive", thr.d, {}}};
    for (std::size_t i : rows) {
      const auto& r = table.rows()[i];
      if (!r.sbi) continue;
      sets[0].values.push_back(*r.sbi);
      if (r.a_index && *r.a_index > thr.a) sets[1].values.push_back(*r.sbi);
      if (r.d_index && *r.d_index > thr.d) sets[2].values.push_back(*r.sbi);
    }
    for (auto& s : sets) {
      std::optional<double> m;
      std::optional<stats::Interval> ci;
      if (!s.values.empty()) m = stats::mean(s.values);
      if (s.values.size() >= 2) {
        ci = stats::bootstrap_ci(s.values, mean, resamples, 0.95, derive_seed(seed, 0x5b1, stream));
      }
      ++stream;
      w.row({group == "all" ? "all" : "domain", group, s.name, real(s.threshold), integer(s.values.size()), real(m),
             ci ? real(ci->lo) : "", ci ? real(ci->hi) : ""});
    }
  }
}

void write_topicsim(std::ostream& bins_out, std::ostream& fits_out, const MetricTable& table, std::size_t bins,
                    const Provenance* prov) {
  CsvWriter wb(bins_out, prov);
  CsvWriter wf(fits_out, prov);
  wb.header({"x", "y", "bin", "x_mean", "y_mean", "n"});
  wf.header({"x", "y", "subset", "n", "slope", "intercept", "r2", "slope_se", "p_value"});
  const auto d = table.numeric("d_index");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] && *d[i] > 0.0) pos.push_back(i);
    if (d[i] && *d[i] < 0.0) neg.push_back(i);
  }
  const auto rows = all_rows(table.size());
  for (const char* x : {"d_index", "a_index"}) {
    const auto xv = table.numeric(x);
    for (const char* y : {"sim_focal_dom", "sim_dom_rest"}) {
      const auto yv = table.numeric(y);
      std::vector<double> xs, ys;
      defined_pairs(xv, yv, rows, xs, ys);
      if (const auto trend = try_trend(xs, ys, bins)) {
        for (std::size_t b = 0; b < trend->bins.size(); ++b) {
          const auto& bin = trend->bins[b];
          wb.row({x, y, integer(b + 1), real(bin.x_mean), real(bin.y_mean), integer(bin.n)});
        }
      }
      // Raw-observation lines; the D-sign subsets expose the two arms.
      const std::vector<std::pair<const char*, const std::vector<std::size_t>*>> subsets{
          {"all", &rows}, {"d_positive", &pos}, {"d_negative", &neg}};
      for (const auto& [subset, members] : subsets) {
        defined_pairs(xv, yv, *members, xs, ys);
        std::optional<stats::LineFit> fit;
        try {
          if (xs.size() >= 3) fit = stats::fit_line(xs, ys);
        } catch (const NumericError&) {
        }
        std::vector<std::string> cells{x, y, subset, integer(xs.size())};
        for (auto& c : fit_cells(fit)) cells.push_back(std::move(c));
        wf.row(cells);
      }
    }
  }
}

void write_dominance(std::ostream& out, const std::vector<DominanceScore>& scores, const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"category", "start", "end", "k", "score", "flags"});
  for (const auto& s : scores) {
    w.row({s.category, std::to_string(s.start), std::to_string(s.end), integer(s.k), real(s.score),
           flags_to_string(s.flags)});
  }
}

void write_versions(std::ostream& pairs_out, std::ostream& bins_out, std::ostream& fit_out,
                    const VersionAnalysis& analysis, const Provenance* prov) {
  CsvWriter wp(pairs_out, prov);
  wp.header({"v1", "v2", "year1", "year2", "delta_a", "delta_d", "citer_jaccard"});
  double jac_sum = 0.0;
  std::size_t disjoint = 0;
  for (const auto& p : analysis.pairs) {
    wp.row({p.v1, p.v2, std::to_string(p.year1), std::to_string(p.year2), real(p.delta_a), real(p.delta_d),
            real(p.citer_jaccard)});
    jac_sum += p.citer_jaccard;
    if (p.citer_jaccard == 0.0) ++disjoint;
  }
  CsvWriter wb(bins_out, prov);
  wb.header({"bin", "delta_a_mean", "delta_d_mean", "n"});
  if (analysis.trend) {
    for (std::size_t b = 0; b < analysis.trend->bins.size(); ++b) {
      const auto& bin = analysis.trend->bins[b];
      wb.row({integer(b + 1), real(bin.x_mean), real(bin.y_mean), integer(bin.n)});
    }
  }
  CsvWriter wf(fit_out, prov);
  wf.header({"pairs", "excluded", "mean_jaccard", "share_disjoint", "slope", "intercept", "r2", "slope_se",
             "p_value"});
  const auto n = analysis.pairs.size();
  std::vector<std::string> cells{integer(n), integer(analysis.excluded),
                                 n ? real(jac_sum / static_cast<double>(n)) : "",
                                 n ? real(static_cast<double>(disjoint) / static_cast<double>(n)) : ""};
  std::optional<stats::LineFit> fit;
  if (analysis.trend) fit = analysis.trend->fit;
  for (auto& c : fit_cells(fit)) cells.push_back(std::move(c));
  wf.row(cells);
}

void write_auc(std::ostream& out, const MetricTable& table,
               const std::unordered_map<std::string, std::string>& nominations, const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"score", "n_disruptive", "n_consolidating", "unmatched", "auc"});
  for (const char* score : {"d_index", "d_approx"}) {
    std::vector<std::pair<std::string, std::string>> sorted(nominations.begin(), nominations.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> pos, neg;
    std::size_t unmatched = 0;
    for (const auto& [id, cls] : sorted) {
      const MetricRow* r = table.find(id);
      if (!r) {
        ++unmatched;
        continue;
      }
      const std::optional<double> v = std::string_view(score) == "d_index" ? r->d_index : r->d_approx;
      if (!v) {
        ++unmatched;
        continue;
      }
      (cls == "disruptive" ? pos : neg).push_back(*v);
    }
    std::optional<double> auc;
    if (!pos.empty() && !neg.empty()) auc = stats::roc_auc(pos, neg);
    w.row({score, integer(pos.size()), integer(neg.size()), integer(unmatched), real(auc)});
  }
}

void write_label_groups(std::ostream& out, const MetricTable& table, int resamples, std::uint64_t seed,
                        const Provenance* prov) {
  CsvWriter w(out, prov);
  w.header({"label", "n", "mean_a", "a_lo", "a_hi", "mean_d", "d_lo", "d_hi"});
  const stats::Statistic mean = [](std::span<const double> v) { return stats::mean(v); };
  std::uint64_t stream = 0;
  for (const char* label : {"finding", "method", "theory"}) {
    std::vector<double> a, d;
    std::size_t n = 0;
    for (const auto& r : table.rows()) {
      if (r.label != label) continue;
      ++n;
      if (r.a_index) a.push_back(*r.a_index);
      if (r.d_index) d.push_back(*r.d_index);
    }
    std::vector<std::string> cells{label, integer(n)};
    for (const auto* v : {&a, &d}) {
      cells.push_back(v->empty() ? "" : real(stats::mean(*v)));
      if (v->size() >= 2) {
        const auto ci = stats::bootstrap_ci(*v, mean, resamples, 0.95, derive_seed(seed, 0x1abe1, stream));
        cells.push_back(real(ci.lo));
        cells.push_back(real(ci.hi));
      } else {
        cells.push_back("");
        cells.push_back("");
      }
      ++stream;
    }
    w.row(cells);
  }
}

std::string default_regression_json() {
  return R"json({"models": [
  {"name": "(1)", "response": "pct:sim_focal_dom", "regressors": ["pct:d_index"], "filter": "d_index > 0"},
  {"name": "(2)", "response": "pct:sim_focal_dom", "regressors": ["pct:d_index"],
   "factors": ["decade", "field", "team_band"], "filter": "d_index > 0"},
  {"name": "(3)", "response": "pct:sim_focal_dom",
   "regressors": ["pct:d_index", "field_overlap", "cite_diff", "year_diff"],
   "factors": ["decade", "field", "team_band"], "filter": "d_index > 0"}
]})json";
}

Thresholds resolve_thresholds(const RunConfig& config, const MetricTable& table) {
  if (config.thresholds == "top1") return Thresholds::top1();
  if (config.thresholds == "top5") return Thresholds::top5();
  if (config.thresholds.rfind("top:", 0) == 0) {
    double f = 0.0;
    try {
      f = std::stod(config.thresholds.substr(4));
    } catch (const std::exception&) {
      throw UsageError("bad thresholds '" + config.thresholds + "'");
    }
    return empirical_thresholds(table, f);
  }
  throw UsageError("thresholds must be top1, top5 or top:<fraction>");
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

struct Prepared {
  std::optional<EmbeddingStore> paper_embeddings;
  std::optional<EmbeddingStore> field_embeddings;
  std::unordered_map<std::string, std::string> labels;
  std::unordered_map<std::string, std::string> nominations;
  std::vector<stats::RegressionSpec> regression;
};

bool needs_topicsim(const RunConfig& c) { return c.wants("topicsim") || (c.wants("regress") && c.regression.empty()); }

// Every input problem surfaces here, before any corpus work starts.
Prepared prepare(const RunConfig& config, bool from_table) {
  for (const auto& a : config.analyses) {
    const auto& names = analysis_names();
    if (std::find(names.begin(), names.end(), a) == names.end()) throw UsageError("unknown analysis '" + a + "'");
  }
  CitationWindow::parse(config.window);
  RequireFilter::parse(config.require);
  if (config.randomizations < 2) throw UsageError("randomizations must be >= 2");
  if (config.bins < 2) throw UsageError("bins must be >= 2");
  if (config.bootstrap < 100) throw UsageError("bootstrap resamples must be >= 100");
  if (config.k < 1) throw UsageError("k must be >= 1");
  if (!(config.sbi_top > 0.0 && config.sbi_top < 1.0)) throw UsageError("sbi_top must be in (0,1)");
  if (config.thresholds != "top1" && config.thresholds != "top5" && config.thresholds.rfind("top:", 0) != 0) {
    throw UsageError("thresholds must be top1, top5 or top:<fraction>");
  }

  Prepared p;
  if (!from_table && needs_topicsim(config) && config.paper_embeddings.empty()) {
    throw UsageError("analysis 'topicsim' requires paper_embeddings");
  }
  if (!from_table && config.wants("span") && config.field_embeddings.empty()) {
    throw UsageError("analysis 'span' requires field_embeddings");
  }
  if ((config.wants("dominance") || config.wants("labels")) && config.labels.empty()) {
    throw UsageError("analyses 'dominance' and 'labels' require a labels file");
  }
  if (config.wants("auc") && config.nominations.empty()) throw UsageError("analysis 'auc' requires nominations");

  if (!config.paper_embeddings.empty()) {
    require_file(config.paper_embeddings, "paper embeddings");
    p.paper_embeddings = EmbeddingStore::load(config.paper_embeddings);
  }
  if (!config.field_embeddings.empty()) {
    require_file(config.field_embeddings, "field embeddings");
    p.field_embeddings = EmbeddingStore::load(config.field_embeddings);
  }
  if (!config.labels.empty()) {
    require_file(config.labels, "labels file");
    p.labels = read_labels(config.labels);
  }
  if (!config.nominations.empty()) {
    require_file(config.nominations, "nominations file");
    p.nominations = read_nominations(config.nominations);
  }
  if (config.wants("regress")) {
    std::string text = default_regression_json();
    if (!config.regression.empty()) {
      require_file(config.regression, "regression spec");
      std::ifstream in(config.regression, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    p.regression = stats::parse_regression_specs(text);
  }
  return p;
}

std::vector<std::string> emit_analyses(const RunConfig& config, MetricTable& table, const CorpusGraph* graph,
                                       const Prepared& prep) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const Provenance prov = config.provenance();
  std::vector<std::string> files;
  auto out = [&](const std::string& name) {
    files.push_back(name);
    return open_out(dir / name);
  };
  auto need_graph = [&](const char* what) {
    if (!graph) throw UsageError(std::string("analysis '") + what + "' needs the corpus");
  };

  if (config.wants("trend")) {
    auto b = out("trend_bins.csv");
    auto f = out("trend_fits.csv");
    write_trend(b, f, table, "a_index", "d_index", {"domain", "decade", "team_band"}, config.bins,
                config.min_citations, &prov);
  }
  if (config.wants("conservation")) {
    std::vector<std::pair<std::string, Thresholds>> sets{{"top1", Thresholds::top1()}, {"top5", Thresholds::top5()}};
    if (config.thresholds != "top1" && config.thresholds != "top5") {
      sets.emplace_back(config.thresholds, resolve_thresholds(config, table));
    }
    auto o = out("conservation.csv");
    write_conservation(o, table, sets, &prov);
  }
  if (config.wants("shares")) {
    auto o = out("shares.csv");
    write_shares(o, table, &prov);
  }
  if (config.wants("sbi")) {
    auto o = out("sbi_compare.csv");
    write_sbi_compare(o, table, config.sbi_top, config.bootstrap, config.seed, &prov);
  }
  if (config.wants("topicsim")) {
    auto b = out("topicsim_bins.csv");
    auto f = out("topicsim_fits.csv");
    write_topicsim(b, f, table, config.bins, &prov);
  }
  if (config.wants("dominance")) {
    need_graph("dominance");
    auto o = out("dominance.csv");
    write_dominance(o, dominance_scores(*graph, prep.labels, config.k, config.decades), &prov);
  }
  if (config.wants("versions")) {
    need_graph("versions");
    auto p = out("versions.csv");
    auto b = out("versions_bins.csv");
    auto f = out("versions_fit.csv");
    write_versions(p, b, f, version_pair_deltas(*graph, table, config.bins), &prov);
  }
  if (config.wants("regress")) {
    const auto frame = stats::frame_from_table(table, prep.regression);
    std::vector<stats::RegressionFit> fits;
    for (const auto& spec : prep.regression) fits.push_back(stats::ols_fixed_effects(spec, frame));
    auto o = out("regression.csv");
    stats::write_regression_table(o, prep.regression, fits, &prov);
  }
  if (config.wants("auc")) {
    auto o = out("auc.csv");
    write_auc(o, table, prep.nominations, &prov);
  }
  if (config.wants("labels")) {
    auto o = out("label_groups.csv");
    write_label_groups(o, table, config.bootstrap, config.seed, &prov);
  }
  return files;
}

}  // namespace

RunSummary run_pipeline(const RunConfig& config) {
  const Prepared prep = prepare(config, false);
  IngestReport report;
  const CorpusGraph graph = load_corpus(config, &report);

  MetricStages stages;
  stages.span = prep.field_embeddings.has_value();
  stages.topicsim = prep.paper_embeddings.has_value();
  MetricInputs inputs;
  if (prep.paper_embeddings) inputs.paper_embeddings = &*prep.paper_embeddings;
  if (prep.field_embeddings) inputs.field_embeddings = &*prep.field_embeddings;
  NoveltyRun novelty;
  RunSummary summary;
  summary.table = compute_metrics(graph, config, stages, inputs, config.wants("pairs") ? &novelty : nullptr);
  LabelJoin joined;
  if (!prep.labels.empty()) joined = join_labels(summary.table, prep.labels);

  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const Provenance prov = config.provenance();
  {
    auto o = open_out(dir / "ingest_report.json");
    o << report.to_json(prov.hash_hex()) << '\n';
    summary.files.push_back("ingest_report.json");
  }
  {
    auto o = open_out(dir / "metrics.csv");
    summary.table.write_csv(o, &prov);
    summary.files.push_back("metrics.csv");
  }
  if (config.wants("pairs")) {
    auto o = open_out(dir / "pairs.csv");
    write_pairs_csv(o, graph, novelty.pairs, &prov);
    summary.files.push_back("pairs.csv");
  }
  if (!prep.labels.empty()) {
    auto o = open_out(dir / "label_join.csv");
    CsvWriter w(o, &prov);
    w.header({"matched", "unmatched"});
    w.row({integer(joined.matched), integer(joined.unmatched)});
    summary.files.push_back("label_join.csv");
  }
  for (auto& f : emit_analyses(config, summary.table, &graph, prep)) summary.files.push_back(std::move(f));
  std::sort(summary.files.begin(), summary.files.end());
  return summary;
}

std::vector<std::string> run_report(const RunConfig& config, MetricTable& table, const CorpusGraph* graph) {
  if (config.wants("pairs")) throw UsageError("analysis 'pairs' is only available from a full run");
  const Prepared prep = prepare(config, true);
  if (!prep.labels.empty()) join_labels(table, prep.labels);
  auto files = emit_analyses(config, table, graph, prep);
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace citemetrics

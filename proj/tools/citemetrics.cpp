// Command-line front end: one subcommand per analysis plus `run` for the
// whole pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "citemetrics/error.hpp"
#include "citemetrics/parallel.hpp"
#include "citemetrics/pipeline.hpp"
#include "citemetrics/regression.hpp"
#include "citemetrics/synth.hpp"

namespace cm = citemetrics;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir;
};

struct CorpusFlags {
  std::vector<std::string> corpus;
  std::string domains;
  std::string require;
  bool strict = false;
  std::string window;
};

void add_corpus_flags(CLI::App* sub, CorpusFlags& f, bool window) {
  sub->add_option("corpus,--corpus", f.corpus, "JSONL corpus files");
  sub->add_option("--domains", f.domains, "label,domain CSV");
  sub->add_option("--require", f.require, "completeness filter, e.g. refs,venue,year=1965:2024");
  sub->add_flag("--strict", f.strict, "abort on the first malformed line");
  if (window) sub->add_option("--window", f.window, "citation window: all or Nyr");
}

cm::RunConfig base_config(const Globals& g, const CorpusFlags* f = nullptr) {
  cm::RunConfig c = g.config_path.empty() ? cm::RunConfig{} : cm::RunConfig::load(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  if (g.threads > 0) c.threads = g.threads;
  if (f) {
    if (!f->corpus.empty()) c.corpus = f->corpus;
    if (!f->domains.empty()) c.domains = f->domains;
    if (!f->require.empty()) c.require = f->require;
    if (f->strict) c.strict = true;
    if (!f->window.empty()) c.window = f->window;
  }
  cm::set_threads(c.threads);
  return c;
}

// `path` when given, else <out_dir>/<fallback>; "-" means stdout.
class Output {
 public:
  Output(const std::string& path, const cm::RunConfig& c, const std::string& fallback) {
    if (path == "-") return;
    fs::path p = path.empty() ? fs::path(c.out_dir) / fallback : fs::path(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file_.open(p, std::ios::binary);
    if (!file_) throw cm::DataError("cannot write " + p.string());
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::pair<int, int> parse_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int y = std::stoi(text);
      return {y, y};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw cm::UsageError(std::string("bad ") + what + " '" + text + "'");
  }
}

cm::MetricTable metrics_or_compute(const std::string& metrics_path, const cm::CorpusGraph* graph,
                                   const cm::RunConfig& c) {
  if (!metrics_path.empty()) return cm::MetricTable::load(metrics_path);
  if (!graph) throw cm::UsageError("need --metrics or a corpus");
  return cm::compute_metrics(*graph, c, {}, {});
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Citation-network innovation metrics"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all)");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.fallthrough();

  std::function<void()> action;

  // ingest
  CorpusFlags ingest_f;
  std::string ingest_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse a corpus and write the ingest report");
  add_corpus_flags(ingest_cmd, ingest_f, false);
  ingest_cmd->add_option("--out", ingest_out, "report path (default <out-dir>/ingest_report.json)");
  ingest_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &ingest_f);
      cm::IngestReport report;
      cm::load_corpus(c, &report);
      Output out(ingest_out, c, "ingest_report.json");
      out.stream() << report.to_json(c.provenance().hash_hex()) << '\n';
    };
  });

  // disrupt
  CorpusFlags disrupt_f;
  std::string disrupt_out;
  auto* disrupt_cmd = app.add_subcommand("disrupt", "disruption index and dominance decomposition");
  add_corpus_flags(disrupt_cmd, disrupt_f, true);
  disrupt_cmd->add_option("--out", disrupt_out, "CSV path (default <out-dir>/disruption.csv)");
  disrupt_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &disrupt_f);
      const auto graph = cm::load_corpus(c);
      const auto results = cm::disruption_all(graph, cm::CitationWindow::parse(c.window));
      const auto prov = c.provenance();
      Output out(disrupt_out, c, "disruption.csv");
      cm::CsvWriter w(out.stream(), &prov);
      w.header({"id", "year", "domain", "team_band", "n_a", "n_b", "n_c", "d_index", "dominant_ref", "c_max",
                "d_local", "b_dom", "d_approx", "flags"});
      for (const auto& r : results) {
        const cm::PaperIndex p = r.focal;
        const bool dom = r.dominant_ref != cm::kNoPaper;
        const bool dec = r.decomposition_defined();
        w.row({graph.external_id(p), std::to_string(graph.year(p)),
               graph.domain(p) == cm::Domain::kUnknown ? "" : std::string(cm::to_string(graph.domain(p))),
               cm::team_size_band(graph.author_count(p)), std::to_string(r.n_a), std::to_string(r.n_b),
               std::to_string(r.n_c), r.d_defined() ? cm::format_real(r.d) : "",
               dom ? graph.external_id(r.dominant_ref) : "", dom ? std::to_string(r.c_max) : "",
               dec ? cm::format_real(r.d_local) : "", dec ? cm::format_real(r.b_dom) : "",
               dec ? cm::format_real(r.d_approx) : "", cm::flags_to_string(r.flags)});
      }
    };
  });

  // novelty
  CorpusFlags novelty_f;
  std::string novelty_out, novelty_pairs, novelty_years;
  std::optional<int> novelty_r;
  auto* novelty_cmd = app.add_subcommand("novelty", "journal-pair z-scores and atypicality");
  add_corpus_flags(novelty_cmd, novelty_f, false);
  novelty_cmd->add_option("--year-range", novelty_years, "FROM:TO publication years to score");
  novelty_cmd->add_option("--R", novelty_r, "randomizations per year");
  novelty_cmd->add_option("--out", novelty_out, "CSV path (default <out-dir>/novelty.csv)");
  novelty_cmd->add_option("--dump-pairs", novelty_pairs, "also write per-pair statistics here");
  novelty_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &novelty_f);
      if (novelty_r) c.randomizations = *novelty_r;
      if (!novelty_years.empty()) std::tie(c.year_min, c.year_max) = parse_range(novelty_years, "year range");
      if (c.randomizations < 2) throw cm::UsageError("--R must be >= 2");
      const auto graph = cm::load_corpus(c);
      cm::NoveltyOptions o;
      o.randomizations = c.randomizations;
      o.seed = c.seed;
      o.year_min = c.year_min;
      o.year_max = c.year_max;
      const auto run = cm::novelty_all(graph, o, !novelty_pairs.empty());
      const auto prov = c.provenance();
      {
        Output out(novelty_out, c, "novelty.csv");
        cm::CsvWriter w(out.stream(), &prov);
        w.header({"id", "a_index", "n_pairs", "flags"});
        for (const auto& r : run.results) {
          if ((c.year_min && graph.year(r.focal) < *c.year_min) || (c.year_max && graph.year(r.focal) > *c.year_max)) {
            continue;
          }
          w.row({graph.external_id(r.focal), r.defined() ? cm::format_real(r.a_index) : "", std::to_string(r.n_pairs),
                 cm::flags_to_string(r.flags)});
        }
      }
      if (!novelty_pairs.empty()) {
        Output out(novelty_pairs, c, "pairs.csv");
        cm::write_pairs_csv(out.stream(), graph, run.pairs, &prov);
      }
    };
  });

  // span
  CorpusFlags span_f;
  std::string span_emb, span_mode, span_out;
  auto* span_cmd = app.add_subcommand("span", "knowledge span over referenced field labels");
  add_corpus_flags(span_cmd, span_f, false);
  span_cmd->add_option("--field-embeddings", span_emb, "field-label embedding file")->required();
  span_cmd->add_option("--labels-mode", span_mode, "top (default) or all level-1 labels per reference");
  span_cmd->add_option("--out", span_out, "CSV path (default <out-dir>/span.csv)");
  span_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &span_f);
      c.field_embeddings = span_emb;
      if (!span_mode.empty()) c.span_labels = span_mode;
      if (c.span_labels != "top" && c.span_labels != "all") throw cm::UsageError("--labels-mode must be top or all");
      const auto store = cm::EmbeddingStore::load(span_emb);
      const auto graph = cm::load_corpus(c);
      const auto mode = c.span_labels == "all" ? cm::SpanLabels::kAll : cm::SpanLabels::kTopConfidence;
      const auto prov = c.provenance();
      Output out(span_out, c, "span.csv");
      cm::CsvWriter w(out.stream(), &prov);
      w.header({"id", "span", "n_fields", "flags"});
      for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto r = cm::knowledge_span(graph, static_cast<cm::PaperIndex>(i), store, mode);
        w.row({graph.external_id(r.focal), (r.flags & cm::kFlagSpanUndefined) ? "" : cm::format_real(r.span),
               std::to_string(r.n_fields), cm::flags_to_string(r.flags)});
      }
    };
  });

  // topicsim
  CorpusFlags topic_f;
  std::string topic_emb, topic_out, topic_centroid;
  std::optional<int> topic_min;
  auto* topic_cmd = app.add_subcommand("topicsim", "similarity to the most-cited reference");
  add_corpus_flags(topic_cmd, topic_f, false);
  topic_cmd->add_option("--embeddings", topic_emb, "paper embedding file")->required();
  topic_cmd->add_option("--min-citations", topic_min, "skip focal papers with fewer citers");
  topic_cmd->add_option("--centroid", topic_centroid, "mean (default) or normalized");
  topic_cmd->add_option("--out", topic_out, "CSV path (default <out-dir>/topicsim.csv)");
  topic_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &topic_f);
      c.paper_embeddings = topic_emb;
      if (topic_min) c.min_citations = *topic_min;
      if (!topic_centroid.empty()) c.centroid = topic_centroid;
      if (c.centroid != "mean" && c.centroid != "normalized") throw cm::UsageError("--centroid must be mean or normalized");
      const auto store = cm::EmbeddingStore::load(topic_emb);
      const auto graph = cm::load_corpus(c);
      const auto mode = c.centroid == "normalized" ? cm::CentroidMode::kNormalizedMean : cm::CentroidMode::kMean;
      const auto prov = c.provenance();
      Output out(topic_out, c, "topicsim.csv");
      cm::CsvWriter w(out.stream(), &prov);
      w.header({"id", "dominant_ref", "sim_focal_dom", "sim_dom_rest", "n_rest", "flags"});
      for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto p = static_cast<cm::PaperIndex>(i);
        if (graph.total_citations(p) < static_cast<std::size_t>(std::max(0, c.min_citations))) continue;
        const auto dom = cm::most_cited_reference(graph, p);
        if (!dom) {
          w.row({graph.external_id(p), "", "", "", "0", cm::flags_to_string(cm::kFlagNoDominantRef)});
          continue;
        }
        const auto r = cm::topic_similarity(graph, p, store, dom->ref, mode);
        w.row({graph.external_id(p), graph.external_id(dom->ref), cm::format_real(r.sim_focal_dom),
               cm::format_real(r.sim_dom_rest), std::to_string(r.n_rest), cm::flags_to_string(r.flags)});
      }
    };
  });

  // sbi
  CorpusFlags sbi_f;
  std::string sbi_out;
  std::optional<int> sbi_horizon;
  auto* sbi_cmd = app.add_subcommand("sbi", "Sleeping Beauty coefficient per paper");
  add_corpus_flags(sbi_cmd, sbi_f, false);
  sbi_cmd->add_option("--horizon", sbi_horizon, "last citation year counted (default: last corpus year)");
  sbi_cmd->add_option("--out", sbi_out, "CSV path (default <out-dir>/sbi.csv)");
  sbi_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &sbi_f);
      if (sbi_horizon) c.sbi_horizon = sbi_horizon;
      const auto graph = cm::load_corpus(c);
      const auto years = graph.years();
      const int horizon = c.sbi_horizon.value_or(years.back());
      const auto prov = c.provenance();
      Output out(sbi_out, c, "sbi.csv");
      cm::CsvWriter w(out.stream(), &prov);
      w.header({"id", "year", "citations", "t_m", "sbi"});
      for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto p = static_cast<cm::PaperIndex>(i);
        const auto h = cm::citation_history(graph, p, horizon);
        if (h.counts.empty()) {
          w.row({graph.external_id(p), std::to_string(graph.year(p)), "0", "", ""});
          continue;
        }
        std::int64_t total = 0;
        for (auto v : h.counts) total += v;
        const auto s = cm::sbi(h.counts);
        w.row({graph.external_id(p), std::to_string(graph.year(p)), std::to_string(total), std::to_string(s.t_m),
               cm::format_real(s.b)});
      }
    };
  });

  // dominance
  CorpusFlags dom_f;
  std::string dom_labels, dom_out, dom_decades;
  std::optional<std::size_t> dom_k;
  auto* dom_cmd = app.add_subcommand("dominance", "top-k persistence across decade boundaries");
  add_corpus_flags(dom_cmd, dom_f, false);
  dom_cmd->add_option("--labels", dom_labels, "id,category CSV (theory|method|finding)")->required();
  dom_cmd->add_option("--k", dom_k, "top-k size");
  dom_cmd->add_option("--decades", dom_decades, "FROM:TO[:STEP] boundaries, default 1970:2020:10");
  dom_cmd->add_option("--out", dom_out, "CSV path (default <out-dir>/dominance.csv)");
  dom_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &dom_f);
      c.labels = dom_labels;
      if (dom_k) c.k = *dom_k;
      if (!dom_decades.empty()) {
        std::vector<int> parts;
        std::stringstream ss(dom_decades);
        std::string item;
        try {
          while (std::getline(ss, item, ':')) parts.push_back(std::stoi(item));
        } catch (const std::exception&) {
          parts.clear();
        }
        if (parts.size() < 2 || parts.size() > 3) throw cm::UsageError("bad --decades '" + dom_decades + "'");
        c.decades.from = parts[0];
        c.decades.to = parts[1];
        if (parts.size() == 3) c.decades.step = parts[2];
      }
      const auto labels = cm::read_labels(dom_labels);
      const auto graph = cm::load_corpus(c);
      const auto prov = c.provenance();
      Output out(dom_out, c, "dominance.csv");
      cm::write_dominance(out.stream(), cm::dominance_scores(graph, labels, c.k, c.decades), &prov);
    };
  });

  // trend
  std::string trend_metrics, trend_x = "a_index", trend_y = "d_index", trend_by = "domain,decade,team_band";
  std::string trend_bins_out, trend_fits_out;
  std::optional<std::size_t> trend_bins;
  auto* trend_cmd = app.add_subcommand("trend", "binned trend of one metric column against another");
  trend_cmd->add_option("--metrics", trend_metrics, "metrics.csv from run")->required();
  trend_cmd->add_option("--x", trend_x, "binned column (default a_index)");
  trend_cmd->add_option("--y", trend_y, "averaged column (default d_index)");
  trend_cmd->add_option("--by", trend_by, "comma list of grouping factors");
  trend_cmd->add_option("--bins", trend_bins, "equal-population bins (default 10)");
  std::optional<int> trend_min;
  trend_cmd->add_option("--min-citations", trend_min, "sample: papers with at least this many citers (default 1)");
  trend_cmd->add_option("--out-bins", trend_bins_out, "default <out-dir>/trend_bins.csv");
  trend_cmd->add_option("--out-fits", trend_fits_out, "default <out-dir>/trend_fits.csv");
  trend_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (trend_bins) c.bins = *trend_bins;
      if (trend_min) c.min_citations = *trend_min;
      if (c.bins < 2) throw cm::UsageError("--bins must be >= 2");
      const auto table = cm::MetricTable::load(trend_metrics);
      const auto prov = c.provenance();
      Output bins(trend_bins_out, c, "trend_bins.csv");
      Output fits(trend_fits_out, c, "trend_fits.csv");
      cm::write_trend(bins.stream(), fits.stream(), table, trend_x, trend_y, split_list(trend_by), c.bins,
                      c.min_citations, &prov);
    };
  });

  // versions
  CorpusFlags ver_f;
  std::string ver_metrics;
  auto* ver_cmd = app.add_subcommand("versions", "deltas between linked versions of the same work");
  add_corpus_flags(ver_cmd, ver_f, true);
  ver_cmd->add_option("--metrics", ver_metrics, "metrics.csv to reuse instead of recomputing");
  ver_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &ver_f);
      const auto graph = cm::load_corpus(c);
      const auto table = metrics_or_compute(ver_metrics, &graph, c);
      const auto prov = c.provenance();
      Output p("", c, "versions.csv");
      Output b("", c, "versions_bins.csv");
      Output f("", c, "versions_fit.csv");
      cm::write_versions(p.stream(), b.stream(), f.stream(), cm::version_pair_deltas(graph, table, c.bins), &prov);
    };
  });

  // regress
  std::string reg_metrics, reg_spec, reg_out;
  auto* reg_cmd = app.add_subcommand("regress", "OLS with fixed effects over metric columns");
  reg_cmd->add_option("--metrics", reg_metrics, "metrics.csv from run")->required();
  reg_cmd->add_option("--spec", reg_spec, "model JSON (default: similarity on disruption, D > 0)");
  reg_cmd->add_option("--out", reg_out, "CSV path (default <out-dir>/regression.csv)");
  reg_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (!reg_spec.empty()) c.regression = reg_spec;
      std::string text = cm::default_regression_json();
      if (!c.regression.empty()) {
        std::ifstream in(c.regression, std::ios::binary);
        if (!in) throw cm::DataError("cannot open " + c.regression);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      const auto specs = cm::stats::parse_regression_specs(text);
      const auto table = cm::MetricTable::load(reg_metrics);
      const auto frame = cm::stats::frame_from_table(table, specs);
      std::vector<cm::stats::RegressionFit> fits;
      for (const auto& s : specs) fits.push_back(cm::stats::ols_fixed_effects(s, frame));
      const auto prov = c.provenance();
      Output out(reg_out, c, "regression.csv");
      cm::stats::write_regression_table(out.stream(), specs, fits, &prov);
    };
  });

  // auc
  std::string auc_metrics, auc_nom, auc_out;
  auto* auc_cmd = app.add_subcommand("auc", "ROC AUC of disruption against nominations");
  auc_cmd->add_option("--metrics", auc_metrics, "metrics.csv from run")->required();
  auc_cmd->add_option("--nominations", auc_nom, "id,class CSV (disruptive|consolidating)")->required();
  auc_cmd->add_option("--out", auc_out, "CSV path (default <out-dir>/auc.csv)");
  auc_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g);
      c.nominations = auc_nom;
      const auto table = cm::MetricTable::load(auc_metrics);
      const auto prov = c.provenance();
      Output out(auc_out, c, "auc.csv");
      cm::write_auc(out.stream(), table, cm::read_nominations(auc_nom), &prov);
    };
  });

  // report
  CorpusFlags rep_f;
  std::string rep_metrics, rep_analyses;
  auto* rep_cmd = app.add_subcommand("report", "emit analyses from an existing metric table");
  add_corpus_flags(rep_cmd, rep_f, false);
  rep_cmd->add_option("--metrics", rep_metrics, "metrics.csv from run")->required();
  rep_cmd->add_option("--analyses", rep_analyses, "comma list; default from --config");
  rep_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g, &rep_f);
      if (!rep_analyses.empty()) c.analyses = split_list(rep_analyses);
      auto table = cm::MetricTable::load(rep_metrics);
      std::optional<cm::CorpusGraph> graph;
      if (!c.corpus.empty()) graph.emplace(cm::load_corpus(c));
      for (const auto& f : cm::run_report(c, table, graph ? &*graph : nullptr)) std::cout << f << '\n';
    };
  });

  // run
  std::string run_analyses;
  std::optional<int> run_r;
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a config file");
  run_cmd->add_option("--analyses", run_analyses, "comma list overriding the config");
  run_cmd->add_option("--R", run_r, "randomizations per year");
  run_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (!run_analyses.empty()) c.analyses = split_list(run_analyses);
      if (run_r) c.randomizations = *run_r;
      const auto summary = cm::run_pipeline(c);
      for (const auto& f : summary.files) std::cout << f << '\n';
    };
  });

  // generate
  std::string gen_kind = "innovation";
  std::optional<std::size_t> gen_papers;
  bool gen_plant = false;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic corpus with known structure");
  gen_cmd->add_option("--kind", gen_kind, "random, innovation or cluster")
      ->check(CLI::IsMember({"random", "innovation", "cluster"}));
  gen_cmd->add_option("--papers", gen_papers, "papers (random) or focal papers (cluster, innovation per year)");
  gen_cmd->add_flag("--plant-similarity", gen_plant, "cluster: embeddings with similarity rising in |D|");
  gen_cmd->callback([&] {
    action = [&] {
      auto c = base_config(g);
      namespace sy = cm::synth;
      sy::SyntheticCorpus corpus;
      if (gen_kind == "random") {
        sy::RandomOptions o;
        o.seed = c.seed;
        if (gen_papers) o.papers = *gen_papers;
        corpus = sy::random_corpus(o);
      } else if (gen_kind == "cluster") {
        sy::ClusterOptions o;
        o.seed = c.seed;
        o.plant_similarity = gen_plant;
        if (gen_papers) o.focal = *gen_papers;
        corpus = sy::cluster_corpus(o);
      } else {
        sy::InnovationOptions o;
        o.seed = c.seed;
        if (gen_papers) o.focal_per_year = *gen_papers;
        corpus = sy::innovation_corpus(o);
      }
      sy::write_corpus(corpus, c.out_dir);
      std::cout << corpus.records.size() << " papers, " << corpus.edge_count() << " references -> " << c.out_dir
                << '\n';
    };
  });

  std::string current = "citemetrics";
  try {
    app.parse(argc, argv);
    for (const auto* sub : app.get_subcommands()) current += " " + sub->get_name();
    if (action) action();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cm::ErrorKind::kUsage);
  } catch (const cm::Error& e) {
    std::cerr << current << ": " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << current << ": " << e.what() << '\n';
    return static_cast<int>(cm::ErrorKind::kData);
  }
  return 0;
}

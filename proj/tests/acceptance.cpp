// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "citemetrics/parallel.hpp"
#include "citemetrics/pipeline.hpp"
#include "citemetrics/regression.hpp"
#include "citemetrics/stats.hpp"
#include "citemetrics/synth.hpp"
#include "support.hpp"

using namespace citemetrics;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome disruption_oracle() {
  const auto t0 = Clock::now();
  std::size_t compared = 0, mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed * 7919);
    const std::size_t n = 100 + rng.below(201);
    const double p = 0.005 + 0.03 * rng.uniform();
    const auto raw = testing::random_digraph(n, p, seed, 3 + static_cast<int>(rng.below(10)));
    const auto norm = testing::normalized(raw);
    const auto g = testing::graph_of(raw);
    const auto window = seed % 2 ? CitationWindow::all_time() : CitationWindow::fixed(1 + static_cast<int>(seed % 5));
    const auto results = disruption_all(g, window);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto o = testing::oracle_classify(norm, g.external_id(static_cast<PaperIndex>(i)), window);
      const double den = static_cast<double>(o.a.size() + o.b.size() + o.c.size());
      const auto& r = results[i];
      if (den == 0.0) {
        if (r.d_defined()) ++mismatches;
        continue;
      }
      ++compared;
      const double d = (static_cast<double>(o.a.size()) - static_cast<double>(o.b.size())) / den;
      if (!r.d_defined() || r.d != d || r.n_a != o.a.size() || r.n_b != o.b.size() || r.n_c != o.c.size()) {
        ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && compared > 0 && secs < 10.0,
          std::to_string(compared) + " defined focals over 50 corpora, " + std::to_string(mismatches) +
              " mismatches, " + fmt("%.2f s", secs)};
}

Outcome decomposition_fidelity() {
  const auto corpus = synth::cluster_corpus(synth::ClusterOptions{});
  const auto g = testing::graph_of(corpus.records);
  std::vector<double> d, approx;
  double worst = 0.0;
  for (const auto& t : corpus.focal) {
    const auto r = disruption(g, g.at(t.id), CitationWindow::all_time());
    if (!r.d_defined() || !r.decomposition_defined()) return {false, "undefined result for " + t.id};
    worst = std::max(worst, std::fabs(r.d_approx - r.d));
    d.push_back(r.d);
    approx.push_back(r.d_approx);
  }
  const double rho = stats::spearman(d, approx);
  return {d.size() >= 100 && worst <= 0.1 && rho >= 0.9,
          std::to_string(d.size()) + " focals, max |D_approx - D| = " + fmt("%.4f", worst) + ", spearman = " +
              fmt("%.4f", rho)};
}

Outcome null_model_exactness() {
  using testing::rec;
  const std::vector<std::vector<PaperRecord>> toys{
      {rec("X1", 1990, {}, "J1"), rec("X2", 1990, {}, "J2"), rec("X3", 1991, {}, "J3"), rec("X4", 1990, {}, "J1"),
       rec("X5", 1991, {}, "J3"), rec("X6", 1991, {}, "J2"), rec("X7", 1990, {}, "J2"),
       rec("P1", 2000, {"X1", "X2", "X3"}), rec("P2", 2000, {"X4", "X5"}), rec("P3", 2000, {"X6", "X7"})},
      {rec("Y1", 1995, {}, "K1"), rec("Y2", 1995, {}, "K1"), rec("Y3", 1995, {}, "K2"), rec("Y4", 1995, {}, "K2"),
       rec("Y5", 1995, {}, "K3"), rec("Y6", 1995, {}, "K3"), rec("Y7", 1995, {}, "K1"), rec("Y8", 1995, {}, "K4"),
       rec("Q1", 2000, {"Y1", "Y2", "Y3"}), rec("Q2", 2000, {"Y4", "Y5", "Y6"}), rec("Q3", 2000, {"Y7", "Y8"})},
  };
  const int r = 10000;
  std::size_t pairs = 0, failures = 0, shuffles = 0, conservation_breaks = 0;
  double worst_ratio = 0.0;
  for (std::size_t ti = 0; ti < toys.size(); ++ti) {
    const auto g = testing::graph_of(toys[ti]);
    const auto exact = testing::exhaustive_pair_moments(toys[ti], 2000);
    const auto mc = pair_zscores(g, 2000, r, 1000 + ti);
    if (mc.size() != exact.size()) ++failures;
    for (const auto& [key, s] : mc) {
      const auto it = exact.find(testing::venue_pair(g.venue_name(s.m), g.venue_name(s.n)));
      if (it == exact.end()) {
        ++failures;
        continue;
      }
      const auto& m = it->second;
      ++pairs;
      const double se_exp = std::sqrt(m.var / r);
      const double sigma = std::sqrt(m.var);
      bool ok;
      if (m.var == 0.0) {
        ok = s.exp == m.mean && s.sigma == 0.0;
      } else {
        const double se_sigma = std::sqrt(std::max(m.mu4 - m.var * m.var, 0.0) / (4.0 * m.var * r));
        const double e_ratio = std::fabs(s.exp - m.mean) / se_exp;
        const double s_ratio = se_sigma > 0 ? std::fabs(s.sigma - sigma) / se_sigma : (s.sigma == sigma ? 0.0 : 1e9);
        worst_ratio = std::max({worst_ratio, e_ratio, s_ratio});
        ok = e_ratio <= 3.0 && s_ratio <= 3.0;
      }
      if (!ok) ++failures;
    }

    const auto obs = observed_assignment(g, 2000);
    for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(r); ++seed) {
      const auto a = null_model_shuffle(g, 2000, seed);
      ++shuffles;
      bool same = a.citing == obs.citing && a.offsets == obs.offsets;
      std::map<int, std::vector<PaperIndex>> want, got;
      for (std::size_t i = 0; i < a.targets.size(); ++i) {
        same = same && g.year(a.targets[i]) == g.year(obs.targets[i]);
        want[g.year(obs.targets[i])].push_back(obs.targets[i]);
        got[g.year(a.targets[i])].push_back(a.targets[i]);
      }
      for (auto* m : {&want, &got}) {
        for (auto& [y, v] : *m) std::sort(v.begin(), v.end());
      }
      if (!same || want != got) ++conservation_breaks;
    }
  }
  return {failures == 0 && conservation_breaks == 0,
          std::to_string(pairs) + " pairs at R=10000, worst deviation " + fmt("%.2f", worst_ratio) + " SE, " +
              std::to_string(failures) + " outside 3 SE; " + std::to_string(conservation_breaks) +
              " conservation breaks in " + std::to_string(shuffles) + " shuffles"};
}

Outcome a_index_sign() {
  using testing::rec;
  const auto g = testing::graph_of({rec("A", 1990, {}, "J1"), rec("B", 1990, {}, "J2"), rec("C", 1991, {}, "J3"),
                                    rec("D", 1991, {}, "J1"), rec("F", 2000, {"A", "B", "C", "D"})});
  PairStatsMap m;
  for (VenueIndex a = 0; a < g.venue_count(); ++a) {
    for (VenueIndex b = a; b < g.venue_count(); ++b) {
      JournalPairStats s;
      s.m = a;
      s.n = b;
      s.sigma = 1.0;
      s.z = 5.0;
      m.emplace(pair_key(a, b), s);
    }
  }
  const auto r = a_index(g, g.at("F"), m);
  return {r.defined() && r.a_index == -5.0,
          "a_index = " + format_real(r.a_index) + " over " + std::to_string(r.n_pairs) + " pairs"};
}

Outcome sbi_cases() {
  using C = std::vector<std::int64_t>;
  const double late = sbi(C{0, 0, 0, 0, 10}).b;
  const double flat = sbi(C{5, 5, 5}).b;
  const double peak = sbi(C{10, 3, 1}).b;
  bool monotone = true;
  double prev = -1.0;
  for (int sleep = 1; sleep <= 10; ++sleep) {
    C c(static_cast<std::size_t>(sleep), 0);
    c.push_back(10);
    monotone = monotone && sbi(c).b > prev;
    prev = sbi(c).b;
  }
  monotone = monotone && sbi(C{0, 0, 3, 0, 10}).b < late && sbi(C{0, 0, 0, 0, 20}).b > late;
  return {late == 15.0 && flat == 0.0 && peak == 0.0 && monotone,
          "B = " + format_real(late) + ", " + format_real(flat) + ", " + format_real(peak) +
              (monotone ? "; monotonicity spot checks hold" : "; monotonicity spot check failed")};
}

Outcome regression_engine(const fs::path& scratch) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    stats::Frame f;
    f.rows = 200;
    for (std::size_t i = 0; i < f.rows; ++i) {
      const auto a = rng.below(6), b = rng.below(3);
      f.factors["u"].push_back("u" + std::to_string(a));
      f.factors["v"].push_back("v" + std::to_string(b));
      const double x1 = rng.uniform() + 0.2 * static_cast<double>(a);
      const double x2 = rng.uniform() * static_cast<double>(b + 1);
      f.numeric["x1"].push_back(x1);
      f.numeric["x2"].push_back(x2);
      f.numeric["y"].push_back(0.8 * x1 - 1.1 * x2 + 0.5 * static_cast<double>(a * b) + rng.uniform());
    }
    const stats::RegressionSpec spec{"m", "y", {"x1", "x2"}, {"u", "v"}, ""};
    const auto fit = stats::ols_fixed_effects(spec, f);
    const auto within = stats::within_slopes(spec, f);
    for (std::size_t j = 0; j < within.size(); ++j) {
      worst = std::max(worst, std::fabs(fit.coefficients[j + 1].estimate - within[j]));
    }
  }
  stats::Design line;
  line.names = {"(intercept)", "x"};
  line.n_regressors = 1;
  line.columns = {std::vector<double>(8, 1.0), {0, 1, 2, 3, 4, 5, 6, 7}};
  for (double x : line.columns[1]) line.y.push_back(3.0 + 2.0 * x);
  const auto exact = stats::ols(line);
  const bool line_ok = std::fabs(exact.coefficients[0].estimate - 3.0) < 1e-12 &&
                       std::fabs(exact.coefficients[1].estimate - 2.0) < 1e-12 && std::fabs(exact.r2 - 1.0) < 1e-12;

  // V-shape: planted similarity rising with |D| on both sides of zero.
  synth::ClusterOptions o;
  o.focal = 400;
  o.min_a = 0;
  o.max_a = 60;
  o.min_b = 0;
  o.max_b = 60;
  o.min_c = 0;
  o.max_c = 30;
  o.plant_similarity = true;
  const auto dir = scratch / "vshape";
  synth::write_corpus(synth::cluster_corpus(o), dir);
  RunConfig c;
  c.corpus = {(dir / "corpus.jsonl").string()};
  c.domains = (dir / "domains.csv").string();
  c.paper_embeddings = (dir / "paper_embeddings.csv").string();
  c.analyses = {"topicsim"};
  c.out_dir = (dir / "out").string();
  run_pipeline(c);
  const auto fits = read_csv_file(dir / "out" / "topicsim_fits.csv");
  const auto bins = read_csv_file(dir / "out" / "topicsim_bins.csv");
  auto col = [](const CsvTable& t, const char* name) { return static_cast<std::size_t>(t.column(name)); };
  double pos = NAN, neg = NAN;
  for (const auto& row : fits.rows) {
    if (row[col(fits, "x")] != "d_index" || row[col(fits, "y")] != "sim_focal_dom") continue;
    if (row[col(fits, "subset")] == "d_positive") pos = std::stod(row[col(fits, "slope")]);
    if (row[col(fits, "subset")] == "d_negative") neg = std::stod(row[col(fits, "slope")]);
  }
  std::vector<std::pair<double, double>> deciles;
  for (const auto& row : bins.rows) {
    if (row[col(bins, "x")] != "d_index" || row[col(bins, "y")] != "sim_focal_dom") continue;
    deciles.emplace_back(std::stod(row[col(bins, "x_mean")]), std::stod(row[col(bins, "y_mean")]));
  }
  // Sign pattern: consecutive decile means fall while D < 0 and rise once D > 0.
  std::string pattern;
  bool v_shape = deciles.size() == 10;
  for (std::size_t i = 1; i < deciles.size(); ++i) {
    const double step = deciles[i].second - deciles[i - 1].second;
    pattern += step > 0 ? '+' : '-';
    if (deciles[i - 1].first >= 0.0 && step <= 0.0) v_shape = false;
    if (deciles[i].first <= 0.0 && step >= 0.0) v_shape = false;
  }
  const bool ok = worst <= 1e-8 && line_ok && pos > 0.0 && neg < 0.0 && v_shape;
  return {ok, "FE vs within max diff " + fmt("%.2e", worst) + (line_ok ? ", exact line R^2 = 1" : ", exact line FAILED") +
                  "; similarity slope " + fmt("%+.3f", pos) + " for D > 0, " + fmt("%+.3f", neg) +
                  " for D < 0; decile steps " + pattern};
}

Outcome auc_oracle() {
  Rng rng(2024);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> pos(1 + rng.below(40)), neg(1 + rng.below(40));
    const auto levels = 1 + rng.below(15);
    for (auto& v : pos) v = static_cast<double>(rng.below(levels)) + (t % 3 == 0 ? rng.uniform() : 0.0);
    for (auto& v : neg) v = static_cast<double>(rng.below(levels)) + (t % 3 == 0 ? rng.uniform() : 0.0);
    double wins = 0.0;
    for (double p : pos) {
      for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    }
    const double oracle = wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
    if (stats::roc_auc(pos, neg) != oracle) ++mismatches;
  }
  return {mismatches == 0, "1000 score sets, " + std::to_string(mismatches) + " mismatches"};
}

fs::path write_innovation(const fs::path& scratch) {
  const auto dir = scratch / "innovation";
  synth::write_corpus(synth::innovation_corpus(synth::InnovationOptions{}), dir);
  return dir;
}

RunConfig innovation_config(const fs::path& data, const fs::path& out) {
  RunConfig c;
  c.corpus = {(data / "corpus.jsonl").string()};
  c.domains = (data / "domains.csv").string();
  c.paper_embeddings = (data / "paper_embeddings.csv").string();
  c.field_embeddings = (data / "field_embeddings.csv").string();
  c.labels = (data / "labels.csv").string();
  c.nominations = (data / "nominations.csv").string();
  c.decades = {1990, 2010, 10};
  c.k = 20;
  c.out_dir = out.string();
  return c;
}

Outcome negative_trend(const fs::path& data) {
  auto c = innovation_config(data, data / "trend_out");
  c.analyses = {"trend"};
  run_pipeline(c);
  const auto fits = read_csv_file(data / "trend_out" / "trend_fits.csv");
  for (const auto& row : fits.rows) {
    if (row[static_cast<std::size_t>(fits.column("group_by"))] != "all") continue;
    const double slope = std::stod(row[static_cast<std::size_t>(fits.column("slope"))]);
    const double p = std::stod(row[static_cast<std::size_t>(fits.column("p_value"))]);
    const auto n = row[static_cast<std::size_t>(fits.column("n"))];
    return {slope < 0.0 && p < 0.01,
            "binned A-D slope " + fmt("%.4g", slope) + ", p = " + fmt("%.2g", p) + ", n = " + n};
  }
  return {false, "no pooled trend row"};
}

Outcome determinism(const fs::path& data) {
  auto a = innovation_config(data, data / "run_a");
  auto b = innovation_config(data, data / "run_b");
  for (auto* c : {&a, &b}) c->analyses = analysis_names();
  const auto ra = run_pipeline(a);
  const auto rb = run_pipeline(b);
  auto tree = [](const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testing::slurp(e.path());
    }
    return files;
  };
  const auto ta = tree(data / "run_a");
  const auto tb = tree(data / "run_b");
  std::size_t bytes = 0;
  for (const auto& [k, v] : ta) bytes += v.size();
  return {ta == tb && ra.files == rb.files && ta.size() == ra.files.size(),
          std::to_string(ta.size()) + " files, " + std::to_string(bytes) + " bytes, trees " +
              (ta == tb ? "identical" : "DIFFER")};
}

Outcome throughput(const fs::path& scratch) {
  synth::RandomOptions o;
  o.papers = 125000;
  o.mean_refs = 8.0;
  o.seed = 99;
  const auto corpus = synth::random_corpus(o);
  const auto dir = scratch / "million";
  synth::write_corpus(corpus, dir);

  const auto t0 = Clock::now();
  IngestReport report;
  const auto g = ingest({dir / "corpus.jsonl"}, DomainMap::load(dir / "domains.csv"), {}, &report);
  const double t_ingest = seconds_since(t0);
  const auto results = disruption_all(g, CitationWindow::all_time());
  const double total = seconds_since(t0);
  std::size_t defined = 0;
  for (const auto& r : results) defined += r.d_defined();
  return {g.edge_count() >= 1000000 && total < 60.0,
          std::to_string(g.edge_count()) + " edges, " + std::to_string(defined) + " defined D; ingest " +
              fmt("%.1f s", t_ingest) + ", total " + fmt("%.1f s", total) + " on " + std::to_string(max_threads()) +
              " thread(s)"};
}

}  // namespace

int main() {
  const auto scratch = testing::scratch_dir("acceptance");
  fs::path innovation;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 disruption equals brute-force oracle", disruption_oracle},
      {"2 dominance decomposition fidelity", decomposition_fidelity},
      {"3 null-model exactness and conservation", null_model_exactness},
      {"4 A-index sign convention", a_index_sign},
      {"5 sleeping beauty hand cases", sbi_cases},
      {"6 regression engine and V-shape", [&] { return regression_engine(scratch); }},
      {"7 AUC equals pair-counting oracle", auc_oracle},
      {"8 negative binned A-D trend", [&] {
         innovation = write_innovation(scratch);
         return negative_trend(innovation);
       }},
      {"9 byte-identical reruns", [&] { return determinism(innovation.empty() ? write_innovation(scratch) : innovation); }},
      {"10 1M-edge ingest + disruption under 60 s", [&] { return throughput(scratch); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-44s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}

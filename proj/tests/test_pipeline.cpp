#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "citemetrics/error.hpp"
#include "citemetrics/pipeline.hpp"
#include "citemetrics/synth.hpp"
#include "support.hpp"

using namespace citemetrics;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CITEMETRICS_TEST_DATA;
const fs::path kFixture = kData / "fixture";
const fs::path kGolden = kData / "golden";

synth::InnovationOptions fixture_options() {
  synth::InnovationOptions o;
  o.fields = 4;
  o.journals_per_field = 3;
  o.pool_per_field = 12;
  o.focal_years = 2;
  o.focal_per_year = 12;
  o.version_fraction = 0.1;
  o.seed = 7;
  return o;
}

const char* kFixtureConfig = R"({
  "corpus": "corpus.jsonl",
  "domains": "domains.csv",
  "paper_embeddings": "paper_embeddings.csv",
  "field_embeddings": "field_embeddings.csv",
  "labels": "labels.csv",
  "nominations": "nominations.csv",
  "analyses": ["pairs", "span", "topicsim", "sbi", "trend", "conservation", "shares",
               "dominance", "versions", "regress", "auc", "labels"],
  "randomizations": 20,
  "seed": 3,
  "k": 10,
  "decades": {"from": 1990, "to": 2010, "step": 10},
  "bins": 5,
  "bootstrap": 200
}
)";

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunConfig fixture_config(const fs::path& out_dir) {
  auto c = RunConfig::load(kFixture / "config.json");
  c.out_dir = out_dir.string();
  return c;
}

std::vector<std::string> sorted_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

MetricRow simple_row(std::string id, int year) {
  MetricRow r;
  r.id = std::move(id);
  r.year = year;
  return r;
}

}  // namespace

TEST_CASE("format_real: nine significant digits, empty for non-finite") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(format_real(2.0 / 3.0) == "0.666666667");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(12345678901.0) == "1.23456789e+10");
  CHECK(format_real(NAN).empty());
  CHECK(format_real(INFINITY).empty());
  CHECK(format_real(std::optional<double>{}).empty());
  CHECK(format_real_exact(0.1) == "0.1");
  CHECK(format_real_exact(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_real_exact(2.0 / 3.0)) == 2.0 / 3.0);
  CHECK(format_real_exact(NAN).empty());
}

TEST_CASE("metric table csv round trip keeps every cell") {
  MetricRow a = simple_row("p,1", 2001);
  a.domain = "Science & Engineering";
  a.citations = 12;
  a.n_a = 3;
  a.d_index = -0.125;
  a.a_index = 4.5;
  a.dominant_ref = "r\"9";
  a.label = "theory";
  a.flags = kFlagSelfPairsOnly | kFlagTopicMissing;
  MetricRow b = simple_row("p2", 1999);
  MetricTable t({a, b});
  CHECK_THROWS_AS(t.add(simple_row("p2", 2000)), DataError);

  Provenance prov{R"({"seed":1})"};
  std::stringstream ss;
  t.write_csv(ss, &prov);
  const std::string first = ss.str();
  CHECK(first.rfind("# config_hash=" + prov.hash_hex() + "\n", 0) == 0);
  const auto back = MetricTable::read_csv(ss);
  REQUIRE(back.size() == 2);
  const auto* r = back.find("p,1");
  REQUIRE(r);
  CHECK(r->domain == a.domain);
  CHECK(r->citations == 12);
  CHECK(r->d_index == -0.125);
  CHECK(r->a_index == 4.5);
  CHECK(r->dominant_ref == a.dominant_ref);
  CHECK(r->flags == a.flags);
  CHECK_FALSE(back.find("p2")->d_index);
  std::stringstream again;
  back.write_csv(again, &prov);
  CHECK(again.str() == first);
}

TEST_CASE("metric table numeric and factor views") {
  MetricRow a = simple_row("a", 1987);
  a.d_index = 0.5;
  a.citations = 4;
  MetricTable t({a, simple_row("b", 2003)});
  const auto d = t.numeric("d_index");
  CHECK(d[0] == 0.5);
  CHECK_FALSE(d[1]);
  CHECK(t.numeric("citations")[0] == 4.0);
  CHECK(t.numeric("decade")[0] == 1980.0);
  CHECK(t.factor("decade")[1] == "2000s");
  CHECK_FALSE(t.factor("domain")[0]);
  CHECK_THROWS_AS(t.numeric("nonsense"), UsageError);
  CHECK_THROWS_AS(t.numeric("domain"), UsageError);
}

TEST_CASE("provenance hash is FNV-1a 64") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Provenance{"a"}.hash_hex() == "af63dc4c8601ec8c");
}

TEST_CASE("run config parsing") {
  const auto c = RunConfig::from_json(R"({"corpus":"c.jsonl","seed":9,"analyses":["trend"],"decades":{"from":1950}})",
                                      "/base");
  CHECK(c.corpus == std::vector<std::string>{"/base/c.jsonl"});
  CHECK(c.seed == 9);
  CHECK(c.decades.from == 1950);
  CHECK(c.decades.to == 2020);
  CHECK(c.wants("trend"));
  CHECK_FALSE(c.wants("auc"));
  CHECK_THROWS_AS(RunConfig::from_json(R"({"sed":1})"), UsageError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"seed":"x"})"), UsageError);
  CHECK_THROWS_AS(RunConfig::from_json("[1]"), UsageError);
  CHECK_THROWS_AS(RunConfig::from_json("{"), UsageError);
  const auto abs = RunConfig::from_json(R"({"corpus":["/data/a.jsonl"]})", "/base");
  CHECK(abs.corpus[0] == "/data/a.jsonl");
}

TEST_CASE("config hash ignores output location, threads and input directories") {
  auto a = RunConfig::from_json(R"({"corpus":"x/c.jsonl","out_dir":"o1","threads":1})", "/one");
  auto b = RunConfig::from_json(R"({"corpus":"y/c.jsonl","out_dir":"o2","threads":8})", "/two");
  CHECK(a.canonical_json() == b.canonical_json());
  CHECK(a.provenance().hash_hex() == b.provenance().hash_hex());
  b.seed = 2;
  CHECK(a.provenance().hash_hex() != b.provenance().hash_hex());
}

TEST_CASE("labels: join, unknown ids counted, unknown classes rejected") {
  MetricTable t({simple_row("A", 2000)});
  const auto j = join_labels(t, {{"A", "theory"}, {"Z", "method"}});
  CHECK(j.matched == 1);
  CHECK(j.unmatched == 1);
  CHECK(t.find("A")->label == "theory");

  const auto dir = testing::scratch_dir("labels");
  write_text(dir / "ok.csv", "id,label\nA,theory\nB,finding\n");
  write_text(dir / "noheader.csv", "A,method\n");
  write_text(dir / "bad.csv", "id,label\nA,hypothesis\n");
  CHECK(read_labels(dir / "ok.csv").size() == 2);
  CHECK(read_labels(dir / "noheader.csv").at("A") == "method");
  CHECK_THROWS_AS(read_labels(dir / "bad.csv"), DataError);
  CHECK_THROWS_AS(read_nominations(dir / "ok.csv"), DataError);
}

TEST_CASE("metric rows agree with the kernels") {
  synth::ClusterOptions o;
  o.focal = 20;
  o.plant_similarity = true;
  const auto corpus = synth::cluster_corpus(o);
  const auto g = build_graph(corpus.records, corpus.domain_map());
  RunConfig config;
  MetricStages stages;
  stages.topicsim = true;
  MetricInputs inputs;
  inputs.paper_embeddings = &*corpus.paper_embeddings;
  const auto table = compute_metrics(g, config, stages, inputs);
  REQUIRE(table.size() == g.size());
  for (const auto& truth : corpus.focal) {
    const auto* row = table.find(truth.id);
    REQUIRE(row);
    const auto d = disruption(g, g.at(truth.id), CitationWindow::all_time());
    CHECK(row->n_a == d.n_a);
    CHECK(row->n_b == d.n_b);
    CHECK(row->n_c == d.n_c);
    CHECK(row->d_index == d.d);
    CHECK(row->dominant_ref == truth.dominant_ref);
    REQUIRE(row->sim_focal_dom);
    CHECK(*row->sim_focal_dom == doctest::Approx(truth.planted_similarity).epsilon(1e-9));
    CHECK(row->year_diff == g.year(g.at(truth.id)) - g.year(g.at(truth.dominant_ref)));
  }
}

TEST_CASE("fail-fast: missing inputs stop the run before any output") {
  const auto dir = testing::scratch_dir("failfast");
  auto config = fixture_config(dir / "out");
  config.paper_embeddings = (dir / "missing.csv").string();
  CHECK_THROWS_AS(run_pipeline(config), DataError);
  CHECK_FALSE(fs::exists(dir / "out"));

  config = fixture_config(dir / "out");
  config.paper_embeddings.clear();
  config.analyses = {"topicsim"};
  CHECK_THROWS_AS(run_pipeline(config), UsageError);
  config.analyses = {"no_such_analysis"};
  CHECK_THROWS_AS(run_pipeline(config), UsageError);
  config = fixture_config(dir / "out");
  config.nominations.clear();
  config.analyses = {"auc"};
  CHECK_THROWS_AS(run_pipeline(config), UsageError);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("empty analysis list writes the metric table and ingest report only") {
  const auto dir = testing::scratch_dir("empty");
  auto config = fixture_config(dir / "out");
  config.analyses.clear();
  config.labels.clear();
  const auto summary = run_pipeline(config);
  CHECK(summary.files == std::vector<std::string>{"ingest_report.json", "metrics.csv"});
  CHECK(sorted_files(dir / "out") == summary.files);
}

TEST_CASE("report over a saved table reproduces the run's analysis files") {
  const auto dir = testing::scratch_dir("report");
  auto config = fixture_config(dir / "run");
  config.analyses = {"trend", "conservation", "shares", "sbi", "auc", "regress", "labels", "topicsim"};
  run_pipeline(config);
  auto table = MetricTable::load(dir / "run" / "metrics.csv");
  config.out_dir = (dir / "report").string();
  const auto files = run_report(config, table, nullptr);
  for (const auto& f : files) {
    CHECK_MESSAGE(testing::slurp(dir / "report" / f) == testing::slurp(dir / "run" / f), f);
  }
  config.analyses = {"pairs"};
  CHECK_THROWS_AS(run_report(config, table, nullptr), UsageError);
}

TEST_CASE("identical configs give byte-identical trees") {
  const auto dir = testing::scratch_dir("determinism");
  const auto a = run_pipeline(fixture_config(dir / "a"));
  const auto b = run_pipeline(fixture_config(dir / "b"));
  REQUIRE(a.files == b.files);
  CHECK(sorted_files(dir / "a") == a.files);
  for (const auto& f : a.files) CHECK_MESSAGE(testing::slurp(dir / "a" / f) == testing::slurp(dir / "b" / f), f);
}

TEST_CASE("bundled fixture reproduces the committed golden outputs") {
  const char* update = std::getenv("CITEMETRICS_UPDATE_GOLDENS");
  if (update && std::string(update) == "1") {
    fs::create_directories(kFixture);
    synth::write_corpus(synth::innovation_corpus(fixture_options()), kFixture);
    write_text(kFixture / "config.json", kFixtureConfig);
    fs::remove_all(kGolden);
    const auto summary = run_pipeline(fixture_config(kGolden));
    for (const auto& f : summary.files) {
      if (fs::path(f).extension() != ".csv") fs::remove(kGolden / f);
    }
    MESSAGE("goldens regenerated under " << kGolden.string());
  }
  REQUIRE(fs::exists(kFixture / "corpus.jsonl"));
  REQUIRE(fs::exists(kGolden));

  const auto dir = testing::scratch_dir("golden");
  const auto summary = run_pipeline(fixture_config(dir));
  std::vector<std::string> produced;
  for (const auto& f : summary.files) {
    if (fs::path(f).extension() == ".csv") produced.push_back(f);
  }
  CHECK(produced == sorted_files(kGolden));
  CHECK(produced.size() == 17);
  for (const auto& f : produced) {
    CHECK_MESSAGE(testing::slurp(dir / f) == testing::slurp(kGolden / f), f);
  }
}

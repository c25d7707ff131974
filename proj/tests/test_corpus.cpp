#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "citemetrics/error.hpp"
#include "citemetrics/synth.hpp"
#include "support.hpp"

using namespace citemetrics;
using testing::graph_of;
using testing::rec;

TEST_CASE("parse_record reads the documented schema") {
  const auto r = parse_record(
      R"({"id":"W1","year":2001,"venue":"Nature","refs":["W0","W2"],)"
      R"("fields":[{"label":"Physics","level":0,"score":0.9}],"n_authors":3,)"
      R"("title":"t","abstract":null,"version_of":"W9"})");
  CHECK(r.id == "W1");
  CHECK(r.year == 2001);
  CHECK(r.venue == std::optional<std::string>("Nature"));
  CHECK(r.refs == std::vector<std::string>{"W0", "W2"});
  REQUIRE(r.fields.size() == 1);
  CHECK(r.fields[0].label == "Physics");
  CHECK(r.fields[0].score == doctest::Approx(0.9));
  CHECK(r.n_authors == 3);
  CHECK(r.title == std::optional<std::string>("t"));
  CHECK_FALSE(r.abstract);
  CHECK(r.version_of == std::optional<std::string>("W9"));
}

TEST_CASE("parse_record defaults and rejections") {
  const auto r = parse_record(R"({"id":"a","year":1999})");
  CHECK(r.n_authors == 1);
  CHECK(r.refs.empty());
  CHECK_FALSE(r.venue);

  CHECK_THROWS_AS(parse_record("not json"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"year":1999})"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"","year":1999})"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"a"})"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"a","year":1999,"n_authors":0})"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"a","year":1999,"fields":[{"label":"x","level":6,"score":0.5}]})"),
                  DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"a","year":1999,"fields":[{"label":"x","level":0,"score":1.5}]})"),
                  DataError);
  CHECK_THROWS_AS(parse_record(R"({"id":"a","year":1999,"refs":"b"})"), DataError);
}

TEST_CASE("to_json_line round-trips") {
  PaperRecord r = rec("x", 2010, {"y", "z"}, "J");
  r.fields = {{"Biology", 0, 0.75}, {"Biology/1", 1, 0.5}};
  r.n_authors = 4;
  r.version_of = "w";
  const auto back = parse_record(to_json_line(r));
  CHECK(back.id == r.id);
  CHECK(back.year == r.year);
  CHECK(back.venue == r.venue);
  CHECK(back.refs == r.refs);
  CHECK(back.fields.size() == 2);
  CHECK(back.fields[1].score == 0.5);
  CHECK(back.n_authors == 4);
  CHECK(back.version_of == r.version_of);
}

TEST_CASE("citers are the hand transpose of a three-paper chain") {
  const auto g = graph_of({rec("A", 2002, {"B"}), rec("B", 2001, {"C"}), rec("C", 2000)});
  CHECK(testing::ids_of(g, {g.citers(g.at("B")).begin(), g.citers(g.at("B")).end()}) == std::set<std::string>{"A"});
  CHECK(testing::ids_of(g, {g.citers(g.at("C")).begin(), g.citers(g.at("C")).end()}) == std::set<std::string>{"B"});
  CHECK(g.citers(g.at("A")).empty());
  CHECK(g.total_citations(g.at("B")) == 1);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("dangling, self and duplicate references are dropped and counted") {
  IngestReport rep;
  const auto g = build_graph({rec("A", 2000, {"Z", "A", "B", "B"}), rec("B", 1999)}, DomainMap{}, {}, &rep);
  CHECK(rep.dangling_refs == 1);
  CHECK(rep.self_refs_removed == 1);
  CHECK(rep.duplicate_refs_collapsed == 1);
  CHECK(g.references(g.at("A")).size() == 1);
  CHECK(rep.edges == 1);
  CHECK(rep.papers == 2);
  const auto j = nlohmann::json::parse(rep.to_json("abc"));
  for (const char* key : {"papers", "edges", "dangling_refs", "self_refs_removed", "parse_errors"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["config_hash"] == "abc");
}

TEST_CASE("duplicate ids keep the first record") {
  IngestReport rep;
  const auto g = build_graph({rec("A", 2000), rec("A", 2005), rec("B", 2001, {"A"})}, DomainMap{}, {}, &rep);
  CHECK(rep.duplicate_ids == 1);
  CHECK(g.size() == 2);
  CHECK(g.year(g.at("A")) == 2000);
  IngestOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(build_graph({rec("A", 2000), rec("A", 2005)}, DomainMap{}, strict), DataError);
}

TEST_CASE("empty corpus is an error") {
  CHECK_THROWS_AS(build_graph({}, DomainMap{}), DataError);
  IngestOptions o;
  o.require.refs = true;
  CHECK_THROWS_AS(build_graph({rec("A", 2000)}, DomainMap{}, o), DataError);
}

TEST_CASE("unknown id lookup throws") {
  const auto g = graph_of({rec("A", 2000)});
  CHECK_THROWS_AS(g.at("nope"), DataError);
  CHECK_FALSE(g.find("nope"));
}

TEST_CASE("malformed lines are skipped with line numbers, or abort in strict mode") {
  std::istringstream in("{\"id\":\"a\",\"year\":2000}\n{oops\n\n{\"id\":\"b\",\"year\":2001}\n");
  FileStats stats;
  std::vector<ParseIssue> issues;
  const auto records = read_records(in, "f.jsonl", false, stats, issues);
  CHECK(records.size() == 2);
  CHECK(stats.errors == 1);
  CHECK(stats.lines == 4);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].line == 2);

  std::istringstream again("{\"id\":\"a\",\"year\":2000}\n{oops\n");
  FileStats s2;
  CHECK_THROWS_AS(read_records(again, "f.jsonl", true, s2, issues), DataError);
}

TEST_CASE("team_size_band") {
  CHECK(team_size_band(1) == "1");
  CHECK(team_size_band(4) == "4");
  CHECK(team_size_band(5) == "5+");
  CHECK(team_size_band(7) == "5+");
  CHECK(team_size_band(3, 3) == "3+");
}

TEST_CASE("domain map and highest-confidence level-0 label") {
  std::istringstream csv("label,domain\nPhysics,Science & Engineering\nHistory,AH\nSociology,social sciences\n");
  const auto m = DomainMap::from_csv(csv);
  CHECK(m.size() == 3);
  CHECK(m.lookup("History") == Domain::kArtsHumanities);
  CHECK(m.lookup("Sociology") == Domain::kSocialSciences);

  PaperRecord r = rec("A", 2000);
  r.fields = {{"History", 0, 0.4}, {"Physics", 0, 0.8}, {"Physics/1", 1, 0.99}};
  PaperRecord u = rec("B", 2000);
  u.fields = {{"Alchemy", 0, 0.9}};
  IngestReport rep;
  const auto g = build_graph({r, u, rec("C", 2000)}, m, {}, &rep);
  CHECK(g.domain(g.at("A")) == Domain::kScienceEngineering);
  CHECK(g.primary_field(g.at("A")) == "Physics");
  CHECK(g.domain(g.at("B")) == Domain::kUnknown);
  CHECK(g.domain(g.at("C")) == Domain::kUnknown);
  CHECK(rep.unmapped_domains == 1);

  std::istringstream bad("Physics,Chemistry\n");
  CHECK_THROWS_AS(DomainMap::from_csv(bad), DataError);
}

TEST_CASE("require filter") {
  const auto f = RequireFilter::parse("refs,venue,year=1990:2000");
  CHECK(f.refs);
  CHECK(f.venue);
  CHECK(f.year_min == 1990);
  CHECK(f.year_max == 2000);
  CHECK(f.accepts(rec("a", 1995, {"b"}, "J")));
  CHECK_FALSE(f.accepts(rec("a", 1995, {}, "J")));
  CHECK_FALSE(f.accepts(rec("a", 1995, {"b"})));
  CHECK_FALSE(f.accepts(rec("a", 2001, {"b"}, "J")));
  CHECK(RequireFilter::parse("").accepts(rec("a", 1)));
  CHECK_THROWS_AS(RequireFilter::parse("abstract"), UsageError);
}

TEST_CASE("version links resolve; dangling ones are counted") {
  PaperRecord v2 = rec("v2", 2001);
  v2.version_of = "v1";
  PaperRecord v3 = rec("v3", 2001);
  v3.version_of = "missing";
  IngestReport rep;
  const auto g = build_graph({rec("v1", 2000), v2, v3}, DomainMap{}, {}, &rep);
  CHECK(g.version_of(g.at("v2")) == g.at("v1"));
  CHECK(g.version_of(g.at("v3")) == kNoPaper);
  CHECK(rep.dangling_versions == 1);
}

TEST_CASE("in-degrees equal the generator's out-degree transpose") {
  synth::RandomOptions o;
  o.papers = 1000;
  o.seed = 99;
  const auto corpus = synth::random_corpus(o);
  std::map<std::string, std::size_t> indeg;
  std::size_t out_total = 0;
  for (const auto& r : corpus.records) {
    out_total += r.refs.size();
    for (const auto& ref : r.refs) ++indeg[ref];
  }
  const auto g = graph_of(corpus.records);
  std::map<std::size_t, std::size_t> hist_truth, hist_graph;
  for (const auto& r : corpus.records) hist_truth[indeg[r.id]]++;
  std::size_t in_total = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto c = g.total_citations(static_cast<PaperIndex>(p));
    hist_graph[c]++;
    in_total += c;
    CHECK(c == indeg[g.external_id(static_cast<PaperIndex>(p))]);
  }
  CHECK(hist_graph == hist_truth);
  CHECK(in_total == out_total);
  CHECK(g.edge_count() == out_total);
}

TEST_CASE("property: adjacency transposes exactly on random digraphs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = graph_of(testing::random_digraph(120, 0.04, seed));
    std::set<std::pair<PaperIndex, PaperIndex>> fwd, bwd;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto p = static_cast<PaperIndex>(i);
      for (PaperIndex r : g.references(p)) fwd.emplace(p, r);
      const auto c = g.citers(p);
      CHECK(std::is_sorted(c.begin(), c.end()));
      for (PaperIndex x : c) bwd.emplace(x, p);
    }
    CHECK(fwd == bwd);
  }
}

TEST_CASE("property: ingest is deterministic byte for byte") {
  const auto dir = testing::scratch_dir("corpus_det");
  synth::RandomOptions o;
  o.papers = 3000;
  const auto corpus = synth::random_corpus(o);
  synth::write_corpus(corpus, dir);
  IngestReport r1, r2;
  const auto g1 = ingest({dir / "corpus.jsonl"}, corpus.domain_map(), {}, &r1);
  const auto g2 = ingest({dir / "corpus.jsonl"}, corpus.domain_map(), {}, &r2);
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const auto p = static_cast<PaperIndex>(i);
    CHECK(g1.external_id(p) == g2.external_id(p));
    CHECK(std::equal(g1.references(p).begin(), g1.references(p).end(), g2.references(p).begin(),
                     g2.references(p).end()));
    CHECK(std::equal(g1.citers(p).begin(), g1.citers(p).end(), g2.citers(p).begin(), g2.citers(p).end()));
  }
  CHECK(r1.to_json() == r2.to_json());
  // Internal order follows file order.
  CHECK(g1.external_id(0) == corpus.records[0].id);
}

TEST_CASE("years index") {
  const auto g = graph_of({rec("a", 2001), rec("b", 1999), rec("c", 2001)});
  CHECK(g.years() == std::vector<int>{1999, 2001});
  CHECK(g.papers_in_year(2001).size() == 2);
  CHECK(g.papers_in_year(1800).empty());
}

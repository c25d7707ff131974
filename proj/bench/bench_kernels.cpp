// Parallel kernels against their serial references on synthetic corpora.
// Run with OMP_NUM_THREADS=<n> to vary the thread count.

#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "citemetrics/disruption.hpp"
#include "citemetrics/novelty.hpp"
#include "citemetrics/random.hpp"
#include "citemetrics/stats.hpp"
#include "citemetrics/synth.hpp"

using namespace citemetrics;

namespace {

const CorpusGraph& graph_for(std::size_t papers) {
  static std::map<std::size_t, CorpusGraph> cache;
  auto it = cache.find(papers);
  if (it == cache.end()) {
    synth::RandomOptions o;
    o.papers = papers;
    o.seed = 5;
    auto corpus = synth::random_corpus(o);
    it = cache.emplace(papers, build_graph(std::move(corpus.records), corpus.domain_map())).first;
  }
  return it->second;
}

void BM_disruption_parallel(benchmark::State& state) {
  const auto& g = graph_for(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(disruption_all(g, CitationWindow::all_time()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}

void BM_disruption_serial(benchmark::State& state) {
  const auto& g = graph_for(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(disruption_all_serial(g, CitationWindow::all_time()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}

void BM_pair_zscores_parallel(benchmark::State& state) {
  const auto& g = graph_for(20000);
  for (auto _ : state) benchmark::DoNotOptimize(pair_zscores(g, 2010, static_cast<int>(state.range(0)), 1));
}

void BM_pair_zscores_serial(benchmark::State& state) {
  const auto& g = graph_for(20000);
  for (auto _ : state) benchmark::DoNotOptimize(pair_zscores_serial(g, 2010, static_cast<int>(state.range(0)), 1));
}

std::vector<double> sample(std::size_t n) {
  Rng rng(9);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

void BM_bootstrap_parallel(benchmark::State& state) {
  const auto v = sample(5000);
  for (auto _ : state) benchmark::DoNotOptimize(stats::bootstrap_ci(v, stats::mean, 1000, 0.95, 3));
}

void BM_bootstrap_serial(benchmark::State& state) {
  const auto v = sample(5000);
  for (auto _ : state) benchmark::DoNotOptimize(stats::bootstrap_ci_serial(v, stats::mean, 1000, 0.95, 3));
}

}  // namespace

BENCHMARK(BM_disruption_parallel)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_disruption_serial)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_zscores_parallel)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_zscores_serial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

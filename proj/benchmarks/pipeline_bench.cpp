#include <benchmark/benchmark.h>

#include "mcdetect/botnet_detect.hpp"
#include "mcdetect/community.hpp"
#include "mcdetect/mcg.hpp"
#include "mcdetect/p2p_filter.hpp"
#include "mcdetect/pipeline.hpp"
#include "mcdetect/synthgen.hpp"

namespace {

using namespace mcdetect;

const LabeledDataset& corpus(std::size_t n_internal) {
  static std::map<std::size_t, LabeledDataset> cache;
  auto it = cache.find(n_internal);
  if (it == cache.end()) {
    SynthConfig config;
    config.n_internal = n_internal;
    config.n_bots_per_botnet = {5, 4, 3};
    config.n_legit_p2p = 20;
    it = cache.emplace(n_internal, generate_dataset(config)).first;
  }
  return it->second;
}

std::vector<WeightedEdge> random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WeightedEdge> edges;
  for (VertexId i = 0; i < n; ++i) {
    for (VertexId j = i + 1; j < n; ++j) {
      if (rng.chance(p)) edges.push_back({i, j, 0.1 + 0.9 * rng.unit()});
    }
  }
  return edges;
}

void BM_ClusterFlows(benchmark::State& state) {
  const auto& d = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cluster_flows(d.flows));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.flows.size()));
}
BENCHMARK(BM_ClusterFlows)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ClusterFlowsPartitioned(benchmark::State& state) {
  const auto& d = corpus(2000);
  const auto jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cluster_flows_partitioned(d.flows, jobs, jobs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.flows.size()));
}
BENCHMARK(BM_ClusterFlowsPartitioned)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BuildMcg(benchmark::State& state) {
  const auto clusters = detect_p2p(cluster_flows(corpus(2000).flows), 30);
  const auto jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_mcg(clusters, kDefaultThetaMcr, jobs));
}
BENCHMARK(BM_BuildMcg)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Louvain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WeightedGraph g(n, random_graph(n, 8.0 / static_cast<double>(n), 1));
  for (auto _ : state) benchmark::DoNotOptimize(louvain(g));
}
BENCHMARK(BM_Louvain)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MaximumClique(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WeightedGraph g(n, random_graph(n, 0.5, 2));
  std::vector<VertexId> all(n);
  for (VertexId v = 0; v < n; ++v) all[v] = v;
  for (auto _ : state) benchmark::DoNotOptimize(max_clique_iterative(g, all));
}
BENCHMARK(BM_MaximumClique)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_FullPipeline(benchmark::State& state) {
  const auto& d = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(d.flows, DetectionThresholds{}));
}
BENCHMARK(BM_FullPipeline)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GenerateDataset(benchmark::State& state) {
  SynthConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(config));
}
BENCHMARK(BM_GenerateDataset)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

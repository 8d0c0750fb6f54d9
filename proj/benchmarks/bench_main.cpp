// Microbenchmarks for the two hot paths (propagation sweeps, path
// enumeration) plus the supporting kernels around them. Graphs come from the
// planted generator so the degree structure matches what the pipeline sees.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "hinscreen/core_network.hpp"
#include "hinscreen/evaluation.hpp"
#include "hinscreen/feature_extract.hpp"
#include "hinscreen/propagation.hpp"
#include "hinscreen/synthetic_bench.hpp"

namespace {

using namespace hinscreen;

struct Workload {
  HinStore store;
  CoreGraph core;
  std::vector<double> weights;
  std::vector<double> y0;
  std::vector<std::uint8_t> labeled;
};

const Workload& workload_for(int n_firms) {
  static std::map<int, Workload> cache;
  auto it = cache.find(n_firms);
  if (it != cache.end()) return it->second;

  PlantedConfig config;
  config.n_firms = static_cast<std::size_t>(n_firms);
  config.n_aux = static_cast<std::size_t>(n_firms / 5);
  config.n_rel_types = 6;
  config.n_conductive = 2;
  config.edge_density = 0.5;
  config.aux_density = 0.4;
  config.n_seed_firms = 20;
  config.rounds = 20;
  config.round_days = 14;
  config.cutoff_day = 94;
  config.horizon_day = 200;
  config.rng_seed = 17;

  Workload w;
  auto data = generate_hin(config);
  w.store = std::move(data.store);
  std::vector<std::string> universe;
  for (EntityIndex i = 0; i < w.store.entity_count(); ++i) {
    if (w.store.entity(i).kind == NodeKind::Firm) universe.push_back(w.store.entity(i).key);
  }
  w.core = build_core(w.store, universe).graph;

  std::mt19937_64 rng(42);
  w.weights.resize(w.core.edge_count());
  for (double& v : w.weights) {
    v = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  }
  w.y0.assign(w.core.node_count(), 0.0);
  w.labeled.assign(w.core.node_count(), 0);
  for (std::size_t i = 0; i < w.core.node_count(); i += 37) {
    w.labeled[i] = 1;
    w.y0[i] = 1.0;
  }
  return cache.emplace(n_firms, std::move(w)).first->second;
}

void BM_JacobiPropagate(benchmark::State& state) {
  const auto& w = workload_for(static_cast<int>(state.range(0)));
  JacobiOptions opts;
  opts.tol = 1e-8;
  opts.max_iter = 200;
  int iterations = 0;
  for (auto _ : state) {
    auto result = jacobi_propagate(w.core, w.weights, w.y0, w.labeled, opts);
    iterations = result.iterations;
    benchmark::DoNotOptimize(result.y.data());
  }
  state.counters["nodes"] = static_cast<double>(w.core.node_count());
  state.counters["edges"] = static_cast<double>(w.core.edge_count());
  state.counters["sweeps"] = iterations;
}
BENCHMARK(BM_JacobiPropagate)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)
    ->Unit(benchmark::kMillisecond);

void BM_DirectSolve(benchmark::State& state) {
  const auto& w = workload_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto y = direct_solve_oracle(w.core, w.weights, w.y0, w.labeled);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["nodes"] = static_cast<double>(w.core.node_count());
}
BENCHMARK(BM_DirectSolve)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_EnumeratePaths(benchmark::State& state) {
  const auto& w = workload_for(500);
  const auto& edge = w.core.edges()[0];
  const std::string from = w.core.node_key(edge.a);
  const std::string to = w.core.node_key(edge.b);
  PathOptions opts;
  opts.max_len = static_cast<int>(state.range(0));
  std::size_t found = 0;
  for (auto _ : state) {
    auto sigs = enumerate_paths(w.store, from, to, opts);
    found = sigs.size();
    benchmark::DoNotOptimize(sigs.data());
  }
  state.counters["signatures"] = static_cast<double>(found);
}
BENCHMARK(BM_EnumeratePaths)->Arg(2)->Arg(3)->Arg(4);

void BM_PathSegmentFeatures(benchmark::State& state) {
  const auto& w = workload_for(static_cast<int>(state.range(0)));
  PathOptions opts;
  opts.max_len = 3;
  for (auto _ : state) {
    auto features = extract_features(w.store, w.core, FeatureScheme::PathSegment, opts);
    benchmark::DoNotOptimize(features.rows.data());
  }
  state.counters["edges"] = static_cast<double>(w.core.edge_count());
}
BENCHMARK(BM_PathSegmentFeatures)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_EdgeWeightForward(benchmark::State& state) {
  const auto& w = workload_for(1000);
  const auto features = extract_features(w.store, w.core, FeatureScheme::CoreRelation);
  const auto model = EdgeWeightModel::init(features.col_count(),
                                           static_cast<std::size_t>(state.range(0)),
                                           "logistic", 11);
  for (auto _ : state) {
    auto weights = edge_weights(model, features);
    benchmark::DoNotOptimize(weights.data());
  }
  state.counters["edges"] = static_cast<double>(features.row_count());
}
BENCHMARK(BM_EdgeWeightForward)->Arg(8)->Arg(32);

void BM_AucPr(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(rng() % 1024) / 1023.0;
    labels[i] = static_cast<std::uint8_t>(rng() % 8 == 0);
  }
  labels[0] = 1;
  labels[n - 1] = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(auc_pr(scores, labels));
  }
}
BENCHMARK(BM_AucPr)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();

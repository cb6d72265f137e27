// Microbenchmarks for the hot paths: ranking, calibration, the bootstrap
// loop, scenario synthesis, temperature search and one training run.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <benchmark/benchmark.h>

#include "fairaudit/bootstrap.hpp"
#include "fairaudit/calibration.hpp"
#include "fairaudit/posthoc.hpp"
#include "fairaudit/ranking.hpp"
#include "fairaudit/records.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/scenarios.hpp"
#include "fairaudit/trainers.hpp"

namespace {

using namespace fairaudit;

std::pair<std::vector<double>, std::vector<std::uint8_t>> random_scores(std::size_t n,
                                                                        std::uint64_t key) {
  CounterRng rng(42, Stream::TestHarness, key, 0);
  std::vector<double> p(n);
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = rng.next_unit();
    y[i] = static_cast<std::uint8_t>(rng.next_below(2));
  }
  y.front() = 1;
  y.back() = 0;
  return {std::move(p), std::move(y)};
}

PredictionSet random_set(std::size_t n, std::uint64_t key) {
  auto [p, y] = random_scores(n, key);
  std::vector<PredictionRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].id = "r" + std::to_string(i);
    records[i].p = p[i];
    records[i].y = y[i];
    records[i].identity = i % 5 == 0 ? "g" : "background";
  }
  return PredictionSet("bench", std::move(records));
}

void BM_Auc(benchmark::State& state) {
  auto [p, y] = random_scores(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(auc(p, y).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auc)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_Ece(benchmark::State& state) {
  auto [p, y] = random_scores(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ece(p, y, 15));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ece)->RangeMultiplier(4)->Range(1024, 65536)->Complexity();

void BM_Bootstrap(benchmark::State& state) {
  PairedPredictions paired;
  paired.add(random_set(2000, 3));
  ScalarMetric metric{"error", [](const SampleView& v) {
                        double wrong = 0.0;
                        for (std::size_t i = 0; i < v.p.size(); ++i)
                          wrong += (v.p[i] >= 0.5 ? 1 : 0) != static_cast<int>(v.y[i]);
                        return wrong / static_cast<double>(v.p.size());
                      }};
  ResamplePlan plan{42, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_bootstrap(paired, {metric}, plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bootstrap)->RangeMultiplier(4)->Range(16, 256);

void BM_ScenarioGenerate(benchmark::State& state) {
  ScenarioSpec spec;
  spec.slices.push_back({"background", state.range(0), 0.1, 6.0, ScoreModel::calibrated()});
  for (auto _ : state) benchmark::DoNotOptimize(generate(spec).size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScenarioGenerate)->RangeMultiplier(4)->Range(4096, 65536);

void BM_TemperatureFit(benchmark::State& state) {
  ScenarioSpec spec;
  spec.slices.push_back({"background", 20000, 0.25, 6.0,
                         ScoreModel::overconfident_subgroup(1.0)});
  auto set = generate(spec);
  for (auto _ : state) benchmark::DoNotOptimize(fit_temperature(set).t_star);
}
BENCHMARK(BM_TemperatureFit);

void BM_TrainOneEpoch(benchmark::State& state) {
  auto data = generate_training_data(42, 2000, 4, TrainDataSpec::spurious_minority());
  TrainConfig config;
  config.method = TrainMethod::Dro;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, config).steps);
}
BENCHMARK(BM_TrainOneEpoch);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "tecoord/corpus.hpp"
#include "tecoord/mechanisms.hpp"
#include "tecoord/welfare.hpp"

namespace {

tecoord::Scenario scenario_with(std::size_t agents) {
  tecoord::CorpusShape shape;
  shape.min_agents = agents;
  shape.max_agents = agents;
  return tecoord::generate_corpus(42, 1, shape).front();
}

void BM_WaterFill(benchmark::State& state) {
  const auto s = scenario_with(static_cast<std::size_t>(state.range(0)));
  std::vector<tecoord::Theta> types;
  std::vector<tecoord::Interval> boxes;
  for (const auto& a : s.agents) {
    types.push_back(a.theta);
    boxes.push_back(a.bounds);
  }
  for (auto _ : state) benchmark::DoNotOptimize(tecoord::water_fill(types, boxes, s.coordinator.capacity));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WaterFill)->RangeMultiplier(4)->Range(2, 2048)->Complexity();

void BM_ClearAuction(benchmark::State& state) {
  const auto s = scenario_with(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tecoord::clear_auction(s));
}
BENCHMARK(BM_ClearAuction)->RangeMultiplier(4)->Range(2, 2048);

void BM_PrimalDual(benchmark::State& state) {
  const auto s = scenario_with(static_cast<std::size_t>(state.range(0)));
  std::size_t iterations = 0;
  for (auto _ : state) {
    const auto trace = tecoord::run_primal_dual(s);
    iterations = trace.iterations.size();
    benchmark::DoNotOptimize(trace.final.supply);
  }
  state.counters["iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_PrimalDual)->Arg(2)->Arg(8)->Arg(32);

void BM_VcgDominantCheck(benchmark::State& state) {
  const auto s = scenario_with(static_cast<std::size_t>(state.range(0)));
  const auto grid = tecoord::default_type_grid(s);
  const auto mech = tecoord::make_vcg_mechanism(tecoord::quadratic_model(s), grid);
  for (auto _ : state) benchmark::DoNotOptimize(tecoord::check_ic_dominant(mech, grid).holds);
}
BENCHMARK(BM_VcgDominantCheck)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "aglab/executor.hpp"
#include "aglab/netmodel.hpp"
#include "aglab/schedules.hpp"

namespace {

using namespace aglab;

constexpr AlgorithmId kAlgos[] = {AlgorithmId::Ring, AlgorithmId::NeighborExchange,
                                  AlgorithmId::RecursiveDoubling, AlgorithmId::Bruck,
                                  AlgorithmId::Sparbit};

AlgorithmId algo_arg(const benchmark::State& state) {
  return kAlgos[static_cast<std::size_t>(state.range(0))];
}

void set_label(benchmark::State& state) {
  state.SetLabel(std::string(algorithm_name(algo_arg(state))));
}

void BM_BuildSchedule(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(1));
  const ProcessGroup group = make_group(p, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_schedule(algo_arg(state), group));
  }
  set_label(state);
}

void BM_Execute(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(1));
  const ProcessGroup group = make_group(p, static_cast<std::size_t>(state.range(2)));
  const CommSchedule schedule = build_schedule(algo_arg(state), group);
  ExecuteOptions options;
  options.record_deliveries = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(schedule, options));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * p * (p - 1) *
                          state.range(2));
  set_label(state);
}

void BM_ExecuteConcurrent(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(1));
  const ProcessGroup group = make_group(p, static_cast<std::size_t>(state.range(2)));
  const CommSchedule schedule = build_schedule(algo_arg(state), group);
  ExecuteOptions options;
  options.record_deliveries = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute_concurrent(schedule, options));
  }
  set_label(state);
}

void BM_SimulateCost(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(1));
  const ProcessGroup group = make_group(p, 8);
  const CommSchedule schedule = build_schedule(algo_arg(state), group);
  const Topology topology = Topology::yahoo();
  const RankMapping mapping = make_mapping(MappingKind::Sequential, p, topology);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_cost(schedule, topology, mapping, std::uint64_t{p} << 16));
  }
  set_label(state);
}

void all_algos(benchmark::internal::Benchmark* b, std::initializer_list<std::int64_t> procs,
               std::int64_t block) {
  for (std::int64_t a = 0; a < 5; ++a) {
    for (std::int64_t p : procs) b->Args({a, p, block});
  }
}

}  // namespace

BENCHMARK(BM_BuildSchedule)->Apply([](auto* b) { all_algos(b, {64, 256}, 0); });
BENCHMARK(BM_Execute)->Apply([](auto* b) { all_algos(b, {64, 128}, 4096); });
BENCHMARK(BM_ExecuteConcurrent)->Apply([](auto* b) { all_algos(b, {16, 64}, 1024); })
    ->UseRealTime();
BENCHMARK(BM_SimulateCost)->Apply([](auto* b) { all_algos(b, {64, 128}, 0); });

BENCHMARK_MAIN();

// Serial reference against the OpenMP batch kernels on random sentences.
#include <benchmark/benchmark.h>

#include <random>

#include "headliner/parallel.hpp"

using namespace headliner;

namespace {

constexpr std::size_t kBatch = 256;

const std::vector<SegmentScores>& segment_batch() {
  static const std::vector<SegmentScores> batch = [] {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> len(10, 40);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<SegmentScores> out;
    for (std::size_t i = 0; i < kBatch; ++i) {
      SegmentScores s(len(rng), 6);
      for (double& v : s.values()) v = d(rng);
      out.push_back(std::move(s));
    }
    return out;
  }();
  return batch;
}

const SegmentTransitions& transitions() {
  static const SegmentTransitions trans = [] {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    SegmentTransitions t = SegmentTransitions::zeros(TransitionScheme::kBieuo);
    for (double& v : t.matrix.values()) v = d(rng);
    return t;
  }();
  return trans;
}

const std::vector<PotentialTable>& chain_batch() {
  static const std::vector<PotentialTable> batch = [] {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> len(10, 40);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<PotentialTable> out;
    for (std::size_t i = 0; i < kBatch; ++i) {
      PotentialTable p{Matrix(len(rng), 2), Matrix(2, 2)};
      for (double& v : p.emissions.values()) v = d(rng);
      for (double& v : p.transitions.values()) v = d(rng);
      out.push_back(std::move(p));
    }
    return out;
  }();
  return batch;
}

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel; }

void BM_ScrfKbest(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_scrf_kbest(segment_batch(), transitions(), 10, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}

void BM_ScrfPartition(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_scrf_log_partition(segment_batch(), transitions(), mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}

void BM_CrfViterbi(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(batch_crf_viterbi(chain_batch(), mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}

void BM_CrfPartition(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(batch_crf_log_partition(chain_batch(), mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}

}  // namespace

// Arg 0 runs the serial path, 1 the OpenMP path.
BENCHMARK(BM_ScrfKbest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScrfPartition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrfViterbi)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CrfPartition)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

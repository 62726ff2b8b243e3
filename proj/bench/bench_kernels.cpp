// Serial vs OpenMP kernels at the scale of a full default run
// (56,400 premises, 10 hypotheses).
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "valuelens/kernels.hpp"

namespace {

namespace k = valuelens::kernels;

struct Data {
  std::vector<std::int8_t> labels;
  std::vector<std::uint32_t> hyp;
  std::vector<double> loadings{0.7, 0.61, 0.61, 0.60, 0.51};
  std::vector<double> out;

  explicit Data(std::size_t rows) {
    std::mt19937_64 rng(7);
    labels.resize(rows * 10);
    hyp.resize(rows * 10);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
      hyp[i] = static_cast<std::uint32_t>(i % 10);
    }
    out.resize(rows);
  }
};

template <bool Parallel>
void BM_Project(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::project_parallel(d.labels, d.loadings, valuelens::ProjectionMode::combined, d.out);
    } else {
      k::project_serial(d.labels, d.loadings, valuelens::ProjectionMode::combined, d.out);
    }
    benchmark::DoNotOptimize(d.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Tally(benchmark::State& state) {
  Data d(static_cast<std::size_t>(state.range(0)));
  std::vector<k::LabelCounts> counts(10);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::tally_parallel(d.hyp, d.labels, counts);
    } else {
      k::tally_serial(d.hyp, d.labels, counts);
    }
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}

}  // namespace

BENCHMARK(BM_Project<false>)->Arg(56400)->Arg(564000);
BENCHMARK(BM_Project<true>)->Arg(56400)->Arg(564000);
BENCHMARK(BM_Tally<false>)->Arg(56400)->Arg(564000);
BENCHMARK(BM_Tally<true>)->Arg(56400)->Arg(564000);

BENCHMARK_MAIN();

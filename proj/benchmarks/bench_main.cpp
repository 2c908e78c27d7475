#include <benchmark/benchmark.h>

#include <random>

#include "g2sim/coincidence.hpp"
#include "g2sim/pcsft_model.hpp"
#include "g2sim/qm_source.hpp"
#include "g2sim/run.hpp"

using namespace g2sim;

namespace {

ClickStreams random_streams(std::uint64_t n_bins, double density) {
  std::mt19937_64 gen(1);
  std::bernoulli_distribution click(density);
  ClickStreams s(n_bins, kDefaultBinWidth);
  for (auto c : kChannels) {
    for (std::uint64_t i = 0; i < n_bins; ++i) {
      if (click(gen)) s.set(c, i);
    }
  }
  return s;
}

ExperimentConfig desk_qm(std::uint64_t bins) {
  ExperimentConfig cfg;
  cfg.source = {0.1, 10};
  cfg.optics = {1.0, 0.5, 0.5, 0.5, 0.5};
  cfg.n_bins = bins;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

// Coincidence counting throughput; the target is well above 1e6 bins/s.
static void BM_Accumulate(benchmark::State& state) {
  const auto streams = random_streams(static_cast<std::uint64_t>(state.range(0)), 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate(streams, kDefaultSegmentBins));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetLabel("items = bins");
}
BENCHMARK(BM_Accumulate)->Arg(1 << 20)->Arg(1 << 24);

static void BM_BruteForceCounts(benchmark::State& state) {
  const auto streams = random_streams(static_cast<std::uint64_t>(state.range(0)), 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_counts(streams));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BruteForceCounts)->Arg(1 << 20);

static void BM_SimulateQm(benchmark::State& state) {
  const auto cfg = desk_qm(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_counts(cfg, 0).counts.totals);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateQm)->Arg(4'800'000)->Unit(benchmark::kMillisecond);

static void BM_SimulatePcsft(benchmark::State& state) {
  auto cfg = desk_qm(static_cast<std::uint64_t>(state.range(0)));
  cfg.theory = Theory::pcsft;
  cfg.pcsft = PcsftConfig{};
  cfg.pcsft->incident_power = 7.3e7;
  for (auto _ : state) benchmark::DoNotOptimize(run_counts(cfg, 0).counts.totals);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePcsft)->Arg(96'000)->Unit(benchmark::kMillisecond);

static void BM_PairSampler(benchmark::State& state) {
  const PairCountSampler sampler(0.1, static_cast<std::uint32_t>(state.range(0)));
  auto rng = rng_stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
}
BENCHMARK(BM_PairSampler)->Arg(1)->Arg(100);

static void BM_FirstPassage(benchmark::State& state) {
  auto rng = rng_stream(2, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_first_passage(1.0, 1.0, 1e-5, 1e3, rng));
  }
}
BENCHMARK(BM_FirstPassage);

BENCHMARK_MAIN();

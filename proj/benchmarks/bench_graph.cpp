#include "paracap/dataset.hpp"
#include "paracap/flatten.hpp"
#include "paracap/graph.hpp"
#include "paracap/synth.hpp"

#include <benchmark/benchmark.h>

using namespace paracap;

namespace {

const SynthDesign& design()
{
  static const SynthDesign d = generate_synthetic(SynthConfig{});
  return d;
}

void BM_Generate(benchmark::State& state)
{
  SynthConfig c;
  c.rows = static_cast<int>(state.range(0));
  c.cols = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(generate_synthetic(c));
}
BENCHMARK(BM_Generate)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Flatten(benchmark::State& state)
{
  for (auto _ : state)
    benchmark::DoNotOptimize(flatten(design().netlist));
}
BENCHMARK(BM_Flatten)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& state)
{
  for (auto _ : state)
    benchmark::DoNotOptimize(featurize(design().netlist));
}
BENCHMARK(BM_Featurize)->Unit(benchmark::kMillisecond);

void BM_MakeDataset(benchmark::State& state)
{
  const HeteroGraph g = featurize(design().netlist);
  for (auto _ : state)
    benchmark::DoNotOptimize(make_dataset(g, design().labels, {}, 0));
}
BENCHMARK(BM_MakeDataset)->Unit(benchmark::kMillisecond);

} // namespace

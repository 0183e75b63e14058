#include "paracap/dataset.hpp"
#include "paracap/graph.hpp"
#include "paracap/model/gnn.hpp"
#include "paracap/model/two_stage.hpp"
#include "paracap/nn/tensor.hpp"
#include "paracap/synth.hpp"

#include <benchmark/benchmark.h>

using namespace paracap;
using namespace paracap::model;

namespace {

const GraphInput& input()
{
  static const GraphInput in = [] {
    const SynthDesign d = generate_synthetic(SynthConfig{});
    const HeteroGraph g = featurize(d.netlist);
    return make_input(g, compute_normalization(g));
  }();
  return in;
}

Variant variant(const benchmark::State& state)
{
  return static_cast<Variant>(state.range(0));
}

void variant_args(benchmark::internal::Benchmark* b)
{
  for (Variant v : {Variant::Gcn, Variant::Gat, Variant::SageMean, Variant::SagePool})
    b->Arg(static_cast<std::int64_t>(v));
  b->Unit(benchmark::kMillisecond);
}

void BM_ConvForward(benchmark::State& state)
{
  const GraphInput& in = input();
  nn::Rng rng(1);
  auto conv = make_conv(variant(state), 64, 64, rng, "c");
  const Matrix h = nn::uniform_matrix(in.adj.n, 64, -1, 1, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(conv->forward(in.adj, h));
  state.SetLabel(variant_name(variant(state)));
}
BENCHMARK(BM_ConvForward)->Apply(variant_args);

void BM_ConvBackward(benchmark::State& state)
{
  const GraphInput& in = input();
  nn::Rng rng(2);
  auto conv = make_conv(variant(state), 64, 64, rng, "c");
  const Matrix h = nn::uniform_matrix(in.adj.n, 64, -1, 1, rng);
  const Matrix dy = nn::uniform_matrix(in.adj.n, 64, -1, 1, rng);
  conv->forward(in.adj, h);
  for (auto _ : state)
    benchmark::DoNotOptimize(conv->backward(dy));
  state.SetLabel(variant_name(variant(state)));
}
BENCHMARK(BM_ConvBackward)->Apply(variant_args);

void BM_ClassifierStep(benchmark::State& state)
{
  const GraphInput& in = input();
  ModelConfig mc;
  mc.variant = variant(state);
  Classifier clf(mc, 3);
  nn::Rng rng(3);
  for (auto _ : state) {
    const Matrix logits = clf.forward(in, true);
    clf.backward(nn::uniform_matrix(logits.rows(), logits.cols(), -1e-3, 1e-3, rng));
  }
  state.SetLabel(variant_name(variant(state)));
}
BENCHMARK(BM_ClassifierStep)->Apply(variant_args);

} // namespace

BENCHMARK_MAIN();

#include "paracap/netlist.hpp"
#include "paracap/spf.hpp"
#include "paracap/synth.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace paracap;

namespace {

SynthConfig config(int side)
{
  SynthConfig c;
  c.rows = side;
  c.cols = side;
  return c;
}

const SynthDesign& design(int side)
{
  static std::map<int, SynthDesign> cache;
  auto it = cache.find(side);
  if (it == cache.end())
    it = cache.emplace(side, generate_synthetic(config(side))).first;
  return it->second;
}

void BM_ParseNetlist(benchmark::State& state)
{
  const std::string text = emit_netlist(design(static_cast<int>(state.range(0))).netlist);
  for (auto _ : state)
    benchmark::DoNotOptimize(parse_netlist(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseNetlist)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EmitNetlist(benchmark::State& state)
{
  const Netlist& n = design(static_cast<int>(state.range(0))).netlist;
  for (auto _ : state)
    benchmark::DoNotOptimize(emit_netlist(n));
}
BENCHMARK(BM_EmitNetlist)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ParseSpf(benchmark::State& state)
{
  const SynthDesign& d = design(static_cast<int>(state.range(0)));
  const std::string text = write_oracle_spf(d.labels, d.netlist.top);
  for (auto _ : state)
    benchmark::DoNotOptimize(parse_spf(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseSpf)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildLabels(benchmark::State& state)
{
  const SynthDesign& d = design(static_cast<int>(state.range(0)));
  const auto nets = parse_spf(write_oracle_spf(d.labels, d.netlist.top));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_labels(nets, d.netlist));
}
BENCHMARK(BM_BuildLabels)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

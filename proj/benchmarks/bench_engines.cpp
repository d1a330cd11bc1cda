#include <benchmark/benchmark.h>

#include "warpsim/corpus.hpp"
#include "warpsim/warp.hpp"

using namespace warpsim;

namespace {

HierarchyConfig geometry(std::int64_t sets, std::int64_t assoc, Policy pol) {
  CacheConfig c;
  c.num_sets = sets;
  c.assoc = assoc;
  c.line_size = 64;
  c.policy = pol;
  HierarchyConfig h;
  h.levels = {c};
  return h;
}

const char* kPolicyNames[] = {"LRU", "FIFO", "PLRU", "QLRU"};

void report(benchmark::State& state, const SimStats& s) {
  state.counters["misses"] = static_cast<double>(s.misses());
  state.counters["explicit"] = static_cast<double>(s.explicit_accesses);
  state.counters["accesses"] = static_cast<double>(s.total_accesses());
}

void BM_Warp(benchmark::State& state, const std::string& kernel, const std::string& size) {
  Program p = parse_program(corpus_get(kernel, size));
  HierarchyConfig h = geometry(state.range(0), state.range(1), parse_policy(kPolicyNames[state.range(2)]));
  SimStats last;
  for (auto _ : state) {
    WarpResult r = simulate_warping(p, h);
    benchmark::DoNotOptimize(r.stats.levels.data());
    last = std::move(r.stats);
  }
  report(state, last);
}

void BM_NoWarp(benchmark::State& state, const std::string& kernel, const std::string& size) {
  Program p = parse_program(corpus_get(kernel, size));
  HierarchyConfig h = geometry(state.range(0), state.range(1), parse_policy(kPolicyNames[state.range(2)]));
  SimStats last;
  for (auto _ : state) {
    SimResult r = simulate_nonwarping(p, h);
    benchmark::DoNotOptimize(r.stats.levels.data());
    last = std::move(r.stats);
  }
  report(state, last);
}

// Stencil of growing length: warping time should stay flat.
void BM_StencilScaling(benchmark::State& state) {
  Program p = parse_program(stencil1d_program(state.range(0)));
  HierarchyConfig h = geometry(4, 2, Policy::LRU);
  SimStats last;
  for (auto _ : state) last = simulate_warping(p, h).stats;
  report(state, last);
}

void register_all() {
  for (const auto& kernel : corpus_list())
    for (const char* size : {"small", "medium"}) {
      std::string tag = kernel + "/" + size;
      for (auto* b : {benchmark::RegisterBenchmark(("warp/" + tag).c_str(), BM_Warp, kernel, std::string(size)),
                      benchmark::RegisterBenchmark(("nowarp/" + tag).c_str(), BM_NoWarp, kernel, std::string(size))}) {
        b->ArgNames({"sets", "assoc", "policy"})->Unit(benchmark::kMillisecond);
        for (std::int64_t pol = 0; pol < 4; ++pol) {
          b->Args({1, 2, pol});
          b->Args({4, 2, pol});
          b->Args({64, 8, pol});
        }
      }
    }
  benchmark::RegisterBenchmark("warp/stencil1d-scaling", BM_StencilScaling)
      ->RangeMultiplier(10)
      ->Range(1000, 1000000)
      ->Unit(benchmark::kMicrosecond);
}

const bool registered = (register_all(), true);

}  // namespace

BENCHMARK_MAIN();

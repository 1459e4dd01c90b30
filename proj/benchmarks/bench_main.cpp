#include "shardsched/config.hpp"
#include "shardsched/cover.hpp"
#include "shardsched/oracle.hpp"
#include "shardsched/scheduler.hpp"
#include "shardsched/workload.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <optional>

using namespace shardsched;

namespace
{

void simulate_clique(benchmark::State &state, Algorithm a)
{
    const auto shards = static_cast<std::uint32_t>(state.range(0));
    const ShardGraph g = build_graph(topology::Clique{shards, 1});
    std::optional<CoverHierarchy> cover;
    if (is_multi_leader(a))
    {
        cover = build_hierarchy(g);
    }
    WorkloadSpec w;
    w.k_max = 3;
    w.txn_count = 400;
    SimulationOptions o;
    o.scheduler.algorithm = a;
    std::size_t txns = 0;
    for (auto _ : state)
    {
        RandomWorkload wl(g, w);
        const RunTrace trace = simulate(g, cover ? &*cover : nullptr, wl, o);
        txns += trace.txns.size();
        benchmark::DoNotOptimize(trace.end_time);
    }
    state.counters["txns/s"] = benchmark::Counter(static_cast<double>(txns), benchmark::Counter::kIsRate);
}

void BM_SimulateA1(benchmark::State &s) { simulate_clique(s, Algorithm::A1); }
void BM_SimulateA2(benchmark::State &s) { simulate_clique(s, Algorithm::A2); }
void BM_SimulateA3(benchmark::State &s) { simulate_clique(s, Algorithm::A3); }
void BM_SimulateA4(benchmark::State &s) { simulate_clique(s, Algorithm::A4); }
BENCHMARK(BM_SimulateA1)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateA2)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateA3)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateA4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ChromaticNumber(benchmark::State &state)
{
    // Random conflict graphs of n transactions on a 6-shard clique.
    const auto n = static_cast<std::uint32_t>(state.range(0));
    const ShardGraph g = build_graph(topology::Clique{6, 1});
    WorkloadSpec w;
    w.k_max = 2;
    RandomWorkload gen(g, w);
    std::vector<Adjacency> graphs;
    for (std::uint32_t i = 0; i < 16; ++i)
    {
        Adjacency adj(n);
        std::vector<Transaction> txns;
        for (std::uint32_t v = 0; v < n; ++v)
        {
            txns.push_back(gen.next_txn(ShardId{v % 6}, 0, TxnId{v}));
        }
        for (std::uint32_t u = 0; u < n; ++u)
        {
            for (std::uint32_t v = u + 1; v < n; ++v)
            {
                if (conflicts(txns[u], txns[v]))
                {
                    adj[u].push_back(v);
                    adj[v].push_back(u);
                }
            }
        }
        graphs.push_back(std::move(adj));
    }
    std::size_t i = 0;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(chromatic_number(graphs[i++ % graphs.size()]));
    }
}
BENCHMARK(BM_ChromaticNumber)->Arg(8)->Arg(12)->Arg(16);

void BM_BuildHierarchy(benchmark::State &state)
{
    const auto side = static_cast<std::uint32_t>(state.range(0));
    const ShardGraph g = build_graph(topology::Grid{side, side, 1});
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(build_hierarchy(g).layer_count());
    }
}
BENCHMARK(BM_BuildHierarchy)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "shardsched/config.hpp"
#include "shardsched/conflict_graph.hpp"
#include "shardsched/cover.hpp"
#include "shardsched/harness.hpp"
#include "shardsched/metrics.hpp"
#include "shardsched/oracle.hpp"
#include "shardsched/rng.hpp"
#include "shardsched/workload.hpp"

#include "test_support.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

using namespace shardsched;

namespace
{

constexpr std::uint64_t kSeedsPerCell = 100; // 8 cells per algorithm
constexpr std::uint64_t kTxnsPerRun = 200;
constexpr Tick kCutoff = 300; // generation cutoff for the liveness grid

const std::vector<Algorithm> kAlgorithms{Algorithm::A1, Algorithm::A2, Algorithm::A3, Algorithm::A4};

struct Line
{
    int id;
    std::string name;
    bool passed;
    std::string summary;
    std::vector<std::string> details;
};

std::vector<Line> g_lines;

void report(int id, std::string name, bool passed, std::string summary, std::vector<std::string> details = {})
{
    std::cout << "criterion " << id << " " << name << ": " << (passed ? "PASS" : "FAIL") << " (" << summary << ")\n";
    const std::size_t shown = std::min<std::size_t>(details.size(), 12);
    for (std::size_t i = 0; i < shown; ++i)
    {
        std::cout << "    " << details[i] << '\n';
    }
    if (details.size() > shown)
    {
        std::cout << "    ... " << details.size() - shown << " more\n";
    }
    std::cout.flush();
    g_lines.push_back({id, std::move(name), passed, std::move(summary), std::move(details)});
}

template <typename F>
void parallel_for(std::size_t n, F &&body)
{
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            body(i);
        }
    };
    const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(jobs, n); ++t)
    {
        pool.emplace_back(work);
    }
    work();
    for (auto &t : pool)
    {
        t.join();
    }
}

std::string cell_name(const RunConfig &c)
{
    std::ostringstream os;
    os << to_string(c.scheduler.algorithm) << ' ' << describe(c.topology) << " stretch=" << c.stretch << " k=" << c.workload.k_max
       << " seed=" << c.workload.seed;
    return os.str();
}

std::vector<RunConfig> grid(bool cutoff)
{
    std::vector<RunConfig> out;
    for (Algorithm a : kAlgorithms)
    {
        for (const TopologySpec &topo : {TopologySpec{topology::Clique{8, 1}}, TopologySpec{topology::Line{8, 1}}})
        {
            for (std::int64_t stretch : {1, 3})
            {
                for (std::uint32_t k : {2u, 3u})
                {
                    for (std::uint64_t seed = 1; seed <= kSeedsPerCell; ++seed)
                    {
                        RunConfig c;
                        c.topology = topo;
                        c.scheduler.algorithm = a;
                        c.stretch = stretch;
                        c.workload.k_max = k;
                        c.workload.seed = seed;
                        c.workload.txn_count = cutoff ? 1'000'000 : kTxnsPerRun;
                        c.workload.horizon = cutoff ? kCutoff : kNever;
                        out.push_back(c);
                    }
                }
            }
        }
    }
    return out;
}

// Compact result of one run, so traces need not be kept around.
struct RunResult
{
    RunConfig cfg;
    std::string error;
    std::map<std::string, Verdict> verdicts;
    std::optional<Verdict> makespan;
    std::uint64_t hash = 0;
    std::size_t generated = 0;
    std::size_t rounds_with_pending = 0;
    double max_ratio = 0.0;
    std::optional<SnapshotRow> worst;
};

RunResult run_one(const RunConfig &cfg)
{
    RunResult r;
    r.cfg = cfg;
    try
    {
        const RunOutcome out = execute(cfg);
        for (const Verdict &v : out.verdicts)
        {
            r.verdicts.emplace(v.name, v);
        }
        r.makespan = out.makespan_bound;
        r.hash = out.trace.hash();
        r.generated = out.stats.generated;
        r.rounds_with_pending = out.trace.rounds.size();
        for (const SnapshotRow &row : out.snapshots)
        {
            if (!r.worst || row.ratio > r.worst->ratio)
            {
                r.worst = row;
            }
        }
        r.max_ratio = out.stats.max_ratio;
    }
    catch (const std::exception &e)
    {
        r.error = e.what();
    }
    return r;
}

std::vector<RunResult> run_all(const std::vector<RunConfig> &cfgs)
{
    std::vector<RunResult> out(cfgs.size());
    parallel_for(cfgs.size(), [&](std::size_t i) { out[i] = run_one(cfgs[i]); });
    return out;
}

std::string first_detail(const Verdict &v) { return v.details.empty() ? std::string() : ": " + v.details.front(); }

std::string row_text(const SnapshotRow &r)
{
    std::ostringstream os;
    os << "t=" << r.t << " pending=" << r.n_pending << " l=" << r.l << " d_hat=" << r.d_hat << " t'=" << r.t_prime << " lb=" << r.lb << " ratio=" << std::fixed
       << std::setprecision(3) << r.ratio;
    return os.str();
}

// ---- criteria ----

void criterion_safety(const std::vector<RunResult> &runs)
{
    std::vector<std::string> bad;
    std::map<Algorithm, std::size_t> per_alg;
    std::size_t short_runs = 0;
    for (const RunResult &r : runs)
    {
        ++per_alg[r.cfg.scheduler.algorithm];
        if (!r.error.empty())
        {
            bad.push_back(cell_name(r.cfg) + " error: " + r.error);
            continue;
        }
        const Verdict &v = r.verdicts.at("safety");
        if (!v.passed)
        {
            bad.push_back(cell_name(r.cfg) + first_detail(v));
        }
        short_runs += r.generated < kTxnsPerRun ? 1 : 0;
    }
    std::size_t min_runs = runs.size();
    for (const auto &[a, n] : per_alg)
    {
        min_runs = std::min(min_runs, n);
    }
    const bool ok = bad.empty() && min_runs >= 100 && short_runs == 0;
    report(1, "safety", ok,
           std::to_string(runs.size()) + " runs, " + std::to_string(min_runs) + " per algorithm, " + std::to_string(bad.size()) + " with violations, " +
               std::to_string(short_runs) + " under " + std::to_string(kTxnsPerRun) + " txns",
           bad);
}

void criterion_liveness(const std::vector<RunResult> &runs)
{
    std::vector<std::string> bad;
    std::size_t bound_runs = 0;
    std::size_t bound_failures = 0;
    std::vector<std::string> bound_bad;
    for (const RunResult &r : runs)
    {
        if (!r.error.empty())
        {
            bad.push_back(cell_name(r.cfg) + " error: " + r.error);
            continue;
        }
        const Verdict &v = r.verdicts.at("liveness");
        if (!v.passed)
        {
            bad.push_back(cell_name(r.cfg) + first_detail(v));
        }
        if (r.makespan)
        {
            ++bound_runs;
            if (!r.makespan->passed)
            {
                ++bound_failures;
                bound_bad.push_back(cell_name(r.cfg) + " makespan bound: " + std::to_string(r.makespan->details.size()) +
                                    (r.makespan->details.size() >= 20 ? "+" : "") + " late txns" + first_detail(*r.makespan));
            }
        }
    }
    const std::size_t live_failures = bad.size();
    bad.insert(bad.end(), bound_bad.begin(), bound_bad.end());
    report(2, "liveness", bad.empty(),
           std::to_string(runs.size()) + " runs with generation cutoff t=" + std::to_string(kCutoff) + ", " + std::to_string(live_failures) +
               " with unfinished txns; a1 unit-clique makespan bound 3(k*l+1)+4 violated in " + std::to_string(bound_failures) + "/" +
               std::to_string(bound_runs) + " runs",
           bad);
}

void criterion_coloring()
{
    // Snapshots come from a1 traces on unit cliques; each is replayed in leader
    // arrival order on a fresh conflict graph.
    struct Sample
    {
        std::uint32_t s, k;
        std::vector<Transaction> txns;
    };
    std::vector<Sample> samples;
    Rng pick(4242);
    std::uint64_t seed = 1;
    while (samples.size() < 500)
    {
        const std::uint32_t s = std::vector<std::uint32_t>{4, 9, 16, 25}[seed % 4];
        const auto kcap = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(s))));
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(seed % kcap);
        const ShardGraph g = build_graph(topology::Clique{s, 1});
        WorkloadSpec w;
        w.k_max = k;
        w.seed = seed;
        w.txn_count = 120;
        RandomWorkload wl(g, w);
        SimulationOptions o;
        o.scheduler.algorithm = Algorithm::A1;
        const RunTrace trace = simulate(g, nullptr, wl, o);
        const std::vector<Tick> times = snapshot_times(trace);
        for (int n = 0; n < 10 && samples.size() < 500; ++n)
        {
            const Tick t = times[pick.below(times.size())];
            std::vector<const TxnRecord *> pend;
            for (const auto &r : trace.txns)
            {
                if (r.generated <= t && r.finalized > t)
                {
                    pend.push_back(&r);
                }
            }
            if (pend.empty())
            {
                continue;
            }
            std::sort(pend.begin(), pend.end(), [](auto *a, auto *b) { return std::tie(a->submitted, a->txn.id) < std::tie(b->submitted, b->txn.id); });
            Sample smp{s, k, {}};
            for (auto *r : pend)
            {
                smp.txns.push_back(r->txn);
            }
            samples.push_back(std::move(smp));
        }
        ++seed;
    }

    std::vector<std::string> bad;
    std::uint32_t worst_gap = 0;
    for (const Sample &smp : samples)
    {
        std::map<std::uint32_t, std::uint32_t> load;
        std::uint32_t l = 0;
        for (const auto &t : smp.txns)
        {
            for (const auto &a : t.accesses)
            {
                l = std::max(l, ++load[a.shard.value]);
            }
        }
        ConflictGraph cg;
        std::map<TxnId, Color> color;
        Color top = -1;
        for (const auto &t : smp.txns)
        {
            cg.extend(t);
            const Color c = cg.greedy_color(t.id, cg.color_floor());
            color[t.id] = c;
            top = std::max(top, c);
        }
        const auto used = static_cast<std::uint32_t>(top + 1);
        const std::uint32_t bound = smp.k * l + 1;
        worst_gap = std::max(worst_gap, used > bound ? used - bound : 0);
        // Independent properness check with the reference conflict relation.
        bool proper = true;
        for (std::size_t i = 0; i < smp.txns.size(); ++i)
        {
            for (std::size_t j = i + 1; j < smp.txns.size(); ++j)
            {
                if (testsupport::ref_conflict(smp.txns[i], smp.txns[j]) && color[smp.txns[i].id] == color[smp.txns[j].id])
                {
                    proper = false;
                }
            }
        }
        if (used > bound || !proper)
        {
            bad.push_back("s=" + std::to_string(smp.s) + " k=" + std::to_string(smp.k) + " l=" + std::to_string(l) + " used " + std::to_string(used) +
                          " colors, bound " + std::to_string(bound) + (proper ? "" : ", improper coloring"));
        }
    }
    report(3, "coloring-bound", bad.empty(), std::to_string(samples.size()) + " snapshots replayed, " + std::to_string(bad.size()) + " over k*l+1", bad);
}

void criterion_cover()
{
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> bad;
    int checked = 0;
    for (std::uint32_t s : {4u, 9u, 16u, 25u, 64u})
    {
        const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(s))));
        for (const TopologySpec &spec : {TopologySpec{topology::Clique{s, 1}}, TopologySpec{topology::Line{s, 1}}, TopologySpec{topology::Grid{side, side, 1}},
                                         TopologySpec{topology::RandomMetric{s, 17}}})
        {
            ++checked;
            try
            {
                const ShardGraph g = build_graph(spec);
                const CoverParams params{4.0, 4.0};
                const CoverReport rep = verify_cover(build_hierarchy(g, params), g, params);
                for (const auto &p : rep.properties)
                {
                    if (!p.passed)
                    {
                        bad.push_back(describe(spec) + " " + p.name + (p.counterexamples.empty() ? "" : ": " + p.counterexamples.front()));
                    }
                }
            }
            catch (const std::exception &e)
            {
                bad.push_back(describe(spec) + " construction failed: " + e.what());
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool fast = secs < 30.0;
    if (!fast)
    {
        bad.push_back("took " + std::to_string(secs) + " s, limit 30 s");
    }
    std::ostringstream sum;
    sum << checked << " hierarchies, " << std::fixed << std::setprecision(2) << secs << " s";
    report(4, "cover-properties", bad.empty(), sum.str(), bad);
}

SimpleGraph petersen()
{
    SimpleGraph h{10, {}};
    for (std::uint32_t i = 0; i < 5; ++i)
    {
        h.edges.emplace_back(i, (i + 1) % 5);         // outer cycle
        h.edges.emplace_back(i, i + 5);               // spokes
        h.edges.emplace_back(5 + i, 5 + (i + 2) % 5); // inner pentagram
    }
    return h;
}

void criterion_oracle()
{
    std::vector<std::string> bad;
    auto sandwich = [&](const std::string &name, const Adjacency &adj, const std::vector<std::uint32_t> &order) -> std::optional<std::uint32_t> {
        try
        {
            const GreedyComparison c = greedy_vs_optimal(adj, order);
            if (adj.size() <= 8 && c.optimal != testsupport::brute_chromatic(adj))
            {
                bad.push_back(name + ": exact search disagrees with enumeration");
            }
            return c.optimal;
        }
        catch (const std::exception &e)
        {
            bad.push_back(name + ": " + e.what());
            return std::nullopt;
        }
    };

    // Random conflict graphs drawn from the workload generator.
    const ShardGraph g = build_graph(topology::Clique{8, 1});
    WorkloadSpec spec;
    spec.k_max = 3;
    spec.seed = 77;
    RandomWorkload gen(g, spec);
    Rng rng(31337);
    for (int i = 0; i < 200; ++i)
    {
        const auto n = static_cast<std::uint32_t>(rng.between(1, 12));
        std::vector<Transaction> txns;
        for (std::uint32_t v = 0; v < n; ++v)
        {
            txns.push_back(gen.next_txn(ShardId{static_cast<std::uint32_t>(rng.below(8))}, 0, TxnId{v}));
        }
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        sandwich("random " + std::to_string(i), testsupport::ref_adjacency(txns), order);
    }

    // Reduction instances.
    std::vector<std::pair<std::string, SimpleGraph>> inputs{
        {"triangle", SimpleGraph{3, {{0, 1}, {1, 2}, {0, 2}}}},
        {"P3", SimpleGraph{3, {{0, 1}, {1, 2}}}},
        {"C5", SimpleGraph{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}}},
    };
    const SimpleGraph pg = petersen();
    // Edges come in (outer, spoke, inner) triples. Outer cycle plus spokes, and
    // the two pentagons: 10-edge subgraphs that keep every vertex.
    SimpleGraph outer_spokes{10, {}};
    SimpleGraph pentagons{10, {}};
    for (std::size_t e = 0; e < pg.edges.size(); ++e)
    {
        (e % 3 == 2 ? pentagons : outer_spokes).edges.push_back(pg.edges[e]);
        if (e % 3 == 0)
        {
            pentagons.edges.push_back(pg.edges[e]);
        }
    }
    inputs.push_back({"petersen-outer-spokes", outer_spokes});
    inputs.push_back({"petersen-two-pentagons", pentagons});
    Rng sub(99);
    for (int i = 0; i < 40; ++i)
    {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges = pg.edges;
        for (std::size_t j = edges.size(); j > 1; --j)
        {
            std::swap(edges[j - 1], edges[sub.below(j)]);
        }
        edges.resize(static_cast<std::size_t>(sub.between(1, 10)));
        inputs.push_back({"petersen-sub-" + std::to_string(i), SimpleGraph{10, edges}});
    }

    std::size_t reductions = 0;
    for (const auto &[name, h] : inputs)
    {
        ++reductions;
        const ReductionInstance inst = reduction_instance(h);
        // The instance's conflict graph must be H itself.
        const Adjacency conflict_adj = testsupport::ref_adjacency(inst.txns);
        Adjacency h_adj = h.adjacency();
        for (std::uint32_t v = 0; v < h.n; ++v)
        {
            auto a = conflict_adj[v];
            std::sort(a.begin(), a.end());
            if (a != h_adj[v])
            {
                bad.push_back(name + ": conflict graph differs from the input at vertex " + std::to_string(v));
                break;
            }
        }
        std::vector<std::uint32_t> order(inst.txns.size());
        std::iota(order.begin(), order.end(), 0u);
        const auto chi = sandwich(name, conflict_adj, order);
        const std::uint32_t chi_h = testsupport::brute_chromatic(h_adj);
        if (chi && *chi != chi_h)
        {
            bad.push_back(name + ": chi(conflict)=" + std::to_string(*chi) + " but chi(H)=" + std::to_string(chi_h));
        }
    }
    report(5, "oracle-sandwich", bad.empty(), "200 random graphs, " + std::to_string(reductions) + " reduction instances", bad);
}

void criterion_envelopes()
{
    std::vector<RunConfig> cfgs;
    for (Algorithm a : {Algorithm::A1, Algorithm::A3})
    {
        for (std::uint32_t k : {2u, 3u})
        {
            for (std::uint64_t seed = 1; seed <= kSeedsPerCell; ++seed)
            {
                RunConfig c;
                c.topology = topology::Clique{16, 1};
                c.scheduler.algorithm = a;
                c.workload.k_max = k;
                c.workload.seed = seed;
                c.workload.txn_count = kTxnsPerRun;
                cfgs.push_back(c);
            }
        }
    }
    const auto runs = run_all(cfgs);
    std::vector<std::string> bad;
    std::map<Algorithm, double> worst;
    for (const RunResult &r : runs)
    {
        if (!r.error.empty())
        {
            bad.push_back(cell_name(r.cfg) + " error: " + r.error);
            continue;
        }
        const double factor = r.cfg.scheduler.algorithm == Algorithm::A1 ? 6.0 : 8.0;
        const double envelope = factor * std::min<double>(r.cfg.workload.k_max, 4.0);
        worst[r.cfg.scheduler.algorithm] = std::max(worst[r.cfg.scheduler.algorithm], r.max_ratio);
        if (r.worst && r.worst->ratio > envelope)
        {
            std::ostringstream os;
            os << cell_name(r.cfg) << " envelope " << envelope << " exceeded at " << row_text(*r.worst);
            bad.push_back(os.str());
        }
    }
    std::ostringstream sum;
    sum << runs.size() << " runs on clique(16); max ratio a1 " << std::fixed << std::setprecision(2) << worst[Algorithm::A1] << " (envelope 12/18), a3 "
        << worst[Algorithm::A3] << " (envelope 16/24)";
    report(6, "ratio-envelopes", bad.empty(), sum.str(), bad);
}

void criterion_cadence(const std::vector<RunResult> &runs)
{
    std::vector<std::string> bad;
    std::size_t n = 0;
    for (const RunResult &r : runs)
    {
        if (r.cfg.scheduler.algorithm != Algorithm::A3 || !r.error.empty())
        {
            continue;
        }
        ++n;
        const Verdict &v = r.verdicts.at("cadence");
        if (!v.passed)
        {
            bad.push_back(cell_name(r.cfg) + first_detail(v));
        }
        if (r.rounds_with_pending == 0)
        {
            bad.push_back(cell_name(r.cfg) + ": no scheduling rounds recorded");
        }
    }
    report(7, "stateful-cadence", bad.empty() && n > 0, std::to_string(n) + " stateful single-leader runs", bad);
}

void criterion_determinism(const std::vector<RunResult> &runs)
{
    std::vector<std::string> bad;
    // Re-run every configuration of the safety grid and compare hashes.
    std::vector<RunConfig> cfgs;
    for (const RunResult &r : runs)
    {
        cfgs.push_back(r.cfg);
    }
    const auto again = run_all(cfgs);
    for (std::size_t i = 0; i < runs.size(); ++i)
    {
        if (runs[i].hash != again[i].hash || !runs[i].error.empty())
        {
            bad.push_back(cell_name(runs[i].cfg) + ": " + hex_hash(runs[i].hash) + " vs " + hex_hash(again[i].hash));
        }
    }
    // Golden hashes for the canonical configurations.
    std::ifstream in(std::string(SHARDSCHED_GOLDEN_DIR) + "/hashes.txt");
    std::string name, hash;
    int golden = 0;
    while (in >> name >> hash)
    {
        ++golden;
        try
        {
            const RunOutcome out = execute(load_config(std::string(SHARDSCHED_GOLDEN_DIR) + "/" + name + ".cfg"));
            if (hex_hash(out.trace.hash()) != hash)
            {
                bad.push_back("golden " + name + ": expected " + hash + ", got " + hex_hash(out.trace.hash()));
            }
        }
        catch (const std::exception &e)
        {
            bad.push_back("golden " + name + ": " + e.what());
        }
    }
    if (golden != 4)
    {
        bad.push_back("expected 4 golden hashes, found " + std::to_string(golden));
    }
    report(8, "determinism", bad.empty(), std::to_string(runs.size()) + " configurations executed twice, " + std::to_string(golden) + " golden hashes", bad);
}

void criterion_multi_leader(const std::vector<RunResult> &runs)
{
    std::vector<std::string> bad;
    std::size_t n = 0;
    for (const RunResult &r : runs)
    {
        const Algorithm a = r.cfg.scheduler.algorithm;
        if (!is_multi_leader(a))
        {
            continue;
        }
        ++n;
        if (!r.error.empty())
        {
            bad.push_back(cell_name(r.cfg) + " error: " + r.error);
            continue;
        }
        const Verdict &order = r.verdicts.at("destination-order");
        if (!order.passed)
        {
            bad.push_back(cell_name(r.cfg) + first_detail(order));
        }
        if (a == Algorithm::A4)
        {
            const Verdict &holder = r.verdicts.at("single-holder");
            if (!holder.passed)
            {
                bad.push_back(cell_name(r.cfg) + first_detail(holder));
            }
        }
    }
    report(9, "multi-leader-ordering", bad.empty(), std::to_string(n) + " multi-leader runs", bad);
}

} // namespace

int main()
{
    const auto start = std::chrono::steady_clock::now();

    const auto safety_start = std::chrono::steady_clock::now();
    const std::vector<RunResult> safety_runs = run_all(grid(false));
    const double safety_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - safety_start).count();
    criterion_safety(safety_runs);
    std::cout << "    safety grid took " << std::fixed << std::setprecision(1) << safety_secs << " s\n" << std::defaultfloat;

    criterion_liveness(run_all(grid(true)));
    criterion_coloring();
    criterion_cover();
    criterion_oracle();
    criterion_envelopes();
    criterion_cadence(safety_runs);
    criterion_determinism(safety_runs);
    criterion_multi_leader(safety_runs);

    int failed = 0;
    for (const Line &l : g_lines)
    {
        failed += l.passed ? 0 : 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "acceptance: " << g_lines.size() - static_cast<std::size_t>(failed) << "/" << g_lines.size() << " criteria passed in " << std::fixed
              << std::setprecision(1) << secs << " s\n";
    return failed == 0 ? 0 : 1;
}

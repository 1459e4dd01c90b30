#include "shardsched/harness.hpp"

namespace shardsched
{

std::vector<Verdict> standard_verdicts(const RunTrace &trace, Algorithm algorithm, ConflictMode mode, const CoverHierarchy *cover)
{
    std::vector<Verdict> out{verify_safety(trace, mode), verify_liveness(trace), verify_one_live(trace), verify_destination_order(trace)};
    if (algorithm == Algorithm::A3)
    {
        out.push_back(verify_cadence(trace));
    }
    if (algorithm == Algorithm::A4 && cover != nullptr)
    {
        out.push_back(verify_single_holder(trace, *cover));
    }
    return out;
}

namespace
{

bool unit_clique(const TopologySpec &t)
{
    const auto *c = std::get_if<topology::Clique>(&t);
    return c != nullptr && c->weight == 1;
}

} // namespace

RunOutcome execute(const RunConfig &cfg)
{
    RunOutcome out{build_graph(cfg.topology), std::nullopt, {}, {}, {}, {}, 0, std::nullopt};
    const Algorithm alg = cfg.scheduler.algorithm;
    if (is_multi_leader(alg))
    {
        out.cover = build_hierarchy(out.graph, cfg.cover);
    }
    if (!out.graph.contains(cfg.scheduler.leader))
    {
        throw ConfigError("scheduler.leader " + std::to_string(cfg.scheduler.leader.value) + " is not a shard");
    }
    RandomWorkload workload(out.graph, cfg.workload);
    out.trace = simulate(out.graph, out.cover ? &*out.cover : nullptr, workload, cfg.options());
    out.snapshots = snapshot_series(out.trace, out.graph, cost_model(out.trace));
    out.verdicts = standard_verdicts(out.trace, alg, cfg.scheduler.conflict, out.cover ? &*out.cover : nullptr);
    out.stats = summarize(out.trace, out.snapshots);
    for (const auto &r : out.snapshots)
    {
        out.below_one += r.ratio < 1.0 ? 1 : 0;
    }
    if (alg == Algorithm::A1 && cfg.stretch == 1 && unit_clique(cfg.topology))
    {
        out.makespan_bound = verify_makespan_bound(out.trace, out.graph, cfg.workload.k_max, 1);
    }
    return out;
}

} // namespace shardsched

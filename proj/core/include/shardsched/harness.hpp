#pragma once

#include "shardsched/config.hpp"
#include "shardsched/metrics.hpp"

#include <optional>
#include <vector>

namespace shardsched
{

struct RunOutcome
{
    ShardGraph graph;
    std::optional<CoverHierarchy> cover; // multi-leader runs only
    RunTrace trace;
    std::vector<SnapshotRow> snapshots;
    std::vector<Verdict> verdicts; // failing any of these fails the run
    RunStats stats;
    std::size_t below_one = 0; // snapshots whose ratio is under 1
    std::optional<Verdict> makespan_bound; // a1, synchronous, unit clique
};

/// Verdicts that apply to a finished trace: safety, liveness and one-live
/// always, destination order, cadence for the single-leader stateful
/// scheduler and single-holder when a hierarchy is given.
std::vector<Verdict> standard_verdicts(const RunTrace &trace, Algorithm algorithm, ConflictMode mode, const CoverHierarchy *cover);

/// Builds the topology, the random workload and (when needed) the hierarchy,
/// simulates and evaluates.
RunOutcome execute(const RunConfig &cfg);

inline bool all_passed(const std::vector<Verdict> &vs)
{
    for (const auto &v : vs)
    {
        if (!v.passed)
        {
            return false;
        }
    }
    return true;
}

} // namespace shardsched

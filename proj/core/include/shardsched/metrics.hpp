#pragma once

#include "shardsched/cover.hpp"
#include "shardsched/oracle.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/trace.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace shardsched
{

/// Outcome of a post-run check. details holds counterexamples when failed.
struct Verdict
{
    std::string name;
    bool passed = true;
    std::vector<std::string> details;

    void fail(std::string why)
    {
        passed = false;
        if (details.size() < 20)
        {
            details.push_back(std::move(why));
        }
    }
};

std::ostream &operator<<(std::ostream &os, const Verdict &v);

/// Transactions with generated <= t < finalized.
PendingSnapshot snapshot_at(const RunTrace &trace, const ShardGraph &g, Tick t);

struct SnapshotRow
{
    Tick t = 0;
    std::size_t n_pending = 0;
    std::uint32_t l = 0;
    Length d_hat = 0;
    Tick t_prime = 0; // last finalization among the snapshot, kNever if one never finalized
    std::int64_t lb = 0;
    double ratio = 0.0;
};

/// Ratio of the snapshot's finalization span to its certified lower bound.
/// nullopt when nothing is pending at t.
std::optional<SnapshotRow> snapshot_ratio(const RunTrace &trace, const ShardGraph &g, Tick t, CostModel model);

/// Every max(1, end/50) ticks from 0 to the trace end, plus every generation time.
std::vector<Tick> snapshot_times(const RunTrace &trace);

std::vector<SnapshotRow> snapshot_series(const RunTrace &trace, const ShardGraph &g, CostModel model);

inline CostModel cost_model(const RunTrace &trace) { return trace.stateful ? CostModel::Stateful : CostModel::Stateless; }

/// Committed conflicting transactions appear in the same relative order on
/// every destination they share; committed transactions appear exactly once on
/// each of their destinations and aborted ones nowhere.
Verdict verify_safety(const RunTrace &trace, ConflictMode mode = ConflictMode::Shard);

/// Every generated transaction finalized and the engine went quiescent.
Verdict verify_liveness(const RunTrace &trace);

/// A home never generates before the outcome of its previous transaction arrived.
Verdict verify_one_live(const RunTrace &trace);

/// Every snapshot ratio is at least 1 (the lower bound really is one).
Verdict verify_ratio_floor(const std::vector<SnapshotRow> &rows);

/// Stateful leaders: after a non-empty trigger the next one follows within
/// 4*lambda; after an empty one, within 4*lambda or at the first later arrival.
/// Each round handles at most lambda colors.
Verdict verify_cadence(const RunTrace &trace);

/// Destination processing order. Stateless: every subtransaction taken into
/// flight is the smallest key queued at that moment. Stateful: batches from
/// different clusters are never buffered at a destination at the same time,
/// and each cluster's batches apply in sequence order.
Verdict verify_destination_order(const RunTrace &trace);

/// No two overlapping clusters hold scheduling control at the same time.
Verdict verify_single_holder(const RunTrace &trace, const CoverHierarchy &cover);

/// Makespan bound for the stateless single-leader scheduler in synchronous
/// mode: every transaction pending at a sampled time t finalizes by
/// t + (k*l + 1)*3d + 4d, with l the snapshot's max load.
Verdict verify_makespan_bound(const RunTrace &trace, const ShardGraph &g, std::uint32_t k, Length d);

/// Aggregates for the JSON summary.
struct RunStats
{
    std::size_t generated = 0;
    std::size_t committed = 0;
    std::size_t aborted = 0;
    std::size_t unfinished = 0;
    double mean_latency = 0.0;
    double median_latency = 0.0;
    double p99_latency = 0.0;
    double throughput = 0.0; // finalized per time unit
    Tick makespan = 0;
    double max_ratio = 0.0;
};

RunStats summarize(const RunTrace &trace, const std::vector<SnapshotRow> &rows);

inline constexpr const char *kTxnCsvHeader = "txn_id,home,ts,schedule_time,finalize_time,outcome,n_dests,max_dist";
inline constexpr const char *kSnapshotCsvHeader = "t,n_pending,l,d_hat,t_prime,lb,ratio";

void write_txn_csv(std::ostream &os, const RunTrace &trace, const ShardGraph &g);
void write_snapshot_csv(std::ostream &os, const std::vector<SnapshotRow> &rows);

} // namespace shardsched

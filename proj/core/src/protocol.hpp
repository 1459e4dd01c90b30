#pragma once

// Shared plumbing between the simulation driver and the protocol state
// machines. Not installed.

#include "shardsched/scheduler.hpp"

#include <memory>
#include <vector>

namespace shardsched::detail
{

/// What a leader needs to know about its cluster. Single-leader runs use one
/// pseudo-cluster spanning every shard.
struct LeaderView
{
    ClusterId id;
    Height height;
    ShardId leader;
    std::vector<ShardId> members;
    Length diameter = 0;
};

struct World
{
    Engine &engine;
    RunTrace &trace;
    const ShardGraph &graph;
    const SchedulerConfig &cfg;
    KeyOrder order;
    AccountUniverse accounts;
    std::vector<LeaderView> clusters;
    std::vector<std::vector<std::int64_t>> balances; // per shard, by account index
    std::int64_t stretch = 1;

    Tick now() const { return engine.now(); }
    TxnRecord &record(TxnId id) { return trace.txns.at(id.value); }
    const Transaction &txn(TxnId id) const { return trace.txns.at(id.value).txn; }
    const LeaderView &cluster(ClusterId id) const { return clusters.at(id.value); }

    std::int64_t &balance(AccountId a) { return balances.at(accounts.owner(a).value).at(accounts.index(a)); }

    /// Leader decision for a transaction; the outcome travels to its home.
    void decide(TxnId id, ShardId leader, bool commit, bool final_now);

    /// One destination finished with the transaction (commit applied or
    /// abort acknowledged). The last one finalizes it.
    void resolve(TxnId id);
};

class Protocol
{
public:
    virtual ~Protocol() = default;

    /// A transaction reached the leader of its cluster.
    virtual void on_submit(ClusterId cluster, TxnId id) = 0;

    virtual void handle(const Envelope &env) = 0;
};

std::unique_ptr<Protocol> make_stateless(World &world);
std::unique_ptr<Protocol> make_stateful(World &world, const CoverHierarchy *cover);

/// Whole-transaction conditional write check against a balance lookup.
template <typename Lookup>
bool writes_hold(const std::vector<WriteOp> &writes, Lookup &&balance_of)
{
    std::vector<std::pair<AccountId, std::int64_t>> delta;
    for (const WriteOp &w : writes)
    {
        std::int64_t pending = 0;
        for (auto &[acc, d] : delta)
        {
            if (acc == w.account)
            {
                pending = d;
            }
        }
        const std::int64_t after = balance_of(w.account) + pending + w.delta;
        if (w.guarded && after < 0)
        {
            return false;
        }
        bool found = false;
        for (auto &[acc, d] : delta)
        {
            if (acc == w.account)
            {
                d += w.delta;
                found = true;
            }
        }
        if (!found)
        {
            delta.emplace_back(w.account, w.delta);
        }
    }
    return true;
}

} // namespace shardsched::detail

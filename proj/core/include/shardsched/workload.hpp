#pragma once

#include "shardsched/rng.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/transaction.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shardsched
{

struct RunTrace;

/// Disjoint per-shard account sets: shard s owns ids [s*per_shard, (s+1)*per_shard).
struct AccountUniverse
{
    std::uint32_t shards = 1;
    std::uint32_t per_shard = 16;
    std::int64_t initial_balance = 100;

    AccountId account(ShardId shard, std::uint32_t index) const { return static_cast<AccountId>(shard.value) * per_shard + index; }
    ShardId owner(AccountId a) const { return ShardId{static_cast<std::uint32_t>(a / per_shard)}; }
    std::uint32_t index(AccountId a) const { return static_cast<std::uint32_t>(a % per_shard); }
};

/// Source of transactions for the simulation driver. Each home has at most one
/// live transaction; the driver asks for the next one when the outcome of the
/// previous one reaches the home.
class Workload
{
public:
    virtual ~Workload() = default;

    virtual const AccountUniverse &accounts() const = 0;

    /// (home, time) of every home's first generation.
    virtual std::vector<std::pair<ShardId, Tick>> initial() = 0;

    /// Transaction generated at home at time now, or nullopt when the home is done.
    virtual std::optional<Transaction> generate(ShardId home, Tick now, TxnId id) = 0;

    /// Next generation time at home after an outcome arrived at now.
    virtual std::optional<Tick> next_release(ShardId home, Tick now) = 0;
};

enum class Skew : std::uint8_t
{
    Uniform,
    Zipf,
};

struct WorkloadSpec
{
    std::uint32_t k_max = 2;
    Length d_max = -1; // negative: the graph diameter
    double write_prob = 0.5;
    Skew skew = Skew::Uniform;
    double zipf_alpha = 1.2;
    std::uint64_t txn_count = 200;
    Tick horizon = kNever; // generation cutoff
    std::uint64_t seed = 1;
    std::uint32_t accounts_per_shard = 16;
    std::int64_t initial_balance = 100;
    std::int64_t max_amount = 50;
};

/// Randomized transfers. Destination count is uniform in [1, k_max] (clamped to
/// the d_max neighborhood), destinations are drawn within d_max of home.
class RandomWorkload : public Workload
{
public:
    RandomWorkload(const ShardGraph &g, WorkloadSpec spec);

    const AccountUniverse &accounts() const override { return accounts_; }
    std::vector<std::pair<ShardId, Tick>> initial() override;
    std::optional<Transaction> generate(ShardId home, Tick now, TxnId id) override;
    std::optional<Tick> next_release(ShardId home, Tick now) override;

    /// Builds one transaction without touching the generation budget.
    Transaction next_txn(ShardId home, Tick now, TxnId id);

    const WorkloadSpec &spec() const noexcept { return spec_; }
    std::uint64_t generated() const noexcept { return generated_; }

private:
    std::vector<ShardId> pick_destinations(ShardId home);

    const ShardGraph &graph_;
    WorkloadSpec spec_;
    AccountUniverse accounts_;
    Rng rng_;
    std::uint64_t generated_ = 0;
};

struct ScriptedTxn
{
    ShardId home;
    Tick release = 0;
    std::vector<ShardAccess> accesses;
};

/// Fixed transactions with release times. A home issues its scripted
/// transactions in release order, each no earlier than the previous outcome.
class ScriptedWorkload : public Workload
{
public:
    ScriptedWorkload(std::uint32_t shards, std::vector<ScriptedTxn> txns, AccountUniverse accounts);

    const AccountUniverse &accounts() const override { return accounts_; }
    std::vector<std::pair<ShardId, Tick>> initial() override;
    std::optional<Transaction> generate(ShardId home, Tick now, TxnId id) override;
    std::optional<Tick> next_release(ShardId home, Tick now) override;

private:
    AccountUniverse accounts_;
    std::vector<std::deque<ScriptedTxn>> queues_;
};

/// Largest home-to-destination distance over all generated transactions.
Length measured_d(const RunTrace &trace, const ShardGraph &g);

/// Undirected simple graph on vertices [0, n).
struct SimpleGraph
{
    std::uint32_t n = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    std::vector<std::vector<std::uint32_t>> adjacency() const;
};

/// Parses "u v" lines. Blank lines and lines starting with '#' are skipped.
/// Self-loops and repeated edges are rejected.
SimpleGraph read_edge_list(std::istream &in);

struct ReductionInstance
{
    ShardGraph graph;
    std::vector<Transaction> txns; // one per vertex of the input, txn id == vertex
    AccountUniverse accounts;
    std::vector<std::uint32_t> isolated; // vertices given a dedicated shard
};

/// Coloring-to-scheduling instance: a unit clique with one shard per edge; the
/// two endpoint transactions of an edge both write the single account of its
/// shard. Isolated vertices get a private extra shard so they conflict with
/// nothing. All transactions carry ts = 0.
ReductionInstance reduction_instance(const SimpleGraph &h);

/// Scripted workload releasing every transaction of an instance at t = 0.
/// Transactions sharing a home are issued back to back.
ScriptedWorkload reduction_workload(const ReductionInstance &inst);

} // namespace shardsched

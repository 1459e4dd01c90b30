#pragma once

#include "shardsched/conflict_graph.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/workload.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace shardsched
{

/// Exhaustive searches refuse graphs above this many vertices by default.
inline constexpr std::size_t kOracleBudget = 20;

using Adjacency = std::vector<std::vector<std::uint32_t>>;

/// Vertices ordered by ascending transaction id.
Adjacency adjacency_of(const ConflictGraph &g);

/// Exact chromatic number (DSATUR branch and bound). Throws UsageError when
/// the graph has more than budget vertices.
std::uint32_t chromatic_number(const Adjacency &adj, std::size_t budget = kOracleBudget);
std::uint32_t chromatic_number(const ConflictGraph &g, std::size_t budget = kOracleBudget);

/// Colors used by first-fit greedy over the given vertex order (floor 0).
std::uint32_t greedy_colors(const Adjacency &adj, std::span<const std::uint32_t> order);

std::uint32_t max_degree(const Adjacency &adj);

struct GreedyComparison
{
    std::uint32_t greedy = 0;
    std::uint32_t optimal = 0;
    std::uint32_t max_degree = 0;
};

/// Replays greedy over order and compares with the exact optimum. Throws
/// std::logic_error if optimal <= greedy <= max_degree + 1 fails.
GreedyComparison greedy_vs_optimal(const Adjacency &adj, std::span<const std::uint32_t> order, std::size_t budget = kOracleBudget);

/// Same, with the arrival order given as transaction ids of g.
GreedyComparison greedy_vs_optimal(const ConflictGraph &g, std::span<const TxnId> order, std::size_t budget = kOracleBudget);

/// Crown graph on 2n vertices: u_i = i, v_i = n + i, u_i ~ v_j for i != j.
SimpleGraph crown_graph(std::uint32_t n);

/// Transactions pending at time t together with their load figures.
struct PendingSnapshot
{
    Tick t = 0;
    std::vector<TxnId> txns;
    std::vector<std::uint32_t> loads; // per shard: snapshot transactions accessing it
    std::uint32_t l = 0;              // max load
    Length d_hat = 0;                 // farthest home-to-destination distance
};

PendingSnapshot make_snapshot(Tick t, std::span<const Transaction> txns, const ShardGraph &g);

enum class CostModel : std::uint8_t
{
    Stateless,
    Stateful,
};

/// Certified lower bound on the optimal finalization time of a snapshot:
/// l (stateless) or max(l, d_hat) (stateful). UsageError on an empty snapshot.
std::int64_t lower_bound_tau(const PendingSnapshot &snap, CostModel model);

} // namespace shardsched

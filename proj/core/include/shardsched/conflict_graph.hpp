#pragma once

#include "shardsched/transaction.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>
#include <vector>

namespace shardsched
{

using Color = std::int64_t;

enum class ConflictMode : std::uint8_t
{
    /// Any two accesses to the same destination shard conflict when at least
    /// one side writes there, even on different accounts.
    Shard,
    /// Stricter: only a shared account with at least one writer conflicts.
    Account,
};

bool conflicts(const Transaction &a, const Transaction &b, ConflictMode mode = ConflictMode::Shard);

/// Conflict graph over one leader's live transactions with incremental greedy
/// coloring. Colors already handed out never change unless explicitly
/// cancelled. The color floor never decreases over the graph's lifetime.
class ConflictGraph
{
public:
    explicit ConflictGraph(ConflictMode mode = ConflictMode::Shard) : mode_(mode) {}

    /// Adds t uncolored with edges to every conflicting vertex. Ids may never be
    /// reused, even after removal.
    void extend(const Transaction &t);

    /// Minimum color over colored vertices, never below any floor observed
    /// before. 0 on a fresh graph.
    Color color_floor() const;

    /// Smallest color >= floor unused by colored neighbours.
    Color greedy_color(TxnId t, Color floor);

    void cancel_color(TxnId t);

    /// t must be finalized (committed or aborted).
    void remove(const Transaction &t);

    /// Updates the stored copy's lifecycle status.
    void set_status(TxnId t, TxnStatus s);

    bool contains(TxnId t) const { return vertices_.count(t) != 0; }
    std::optional<Color> color(TxnId t) const;
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_; }
    std::size_t colored_count() const noexcept { return colored_.size(); }
    std::size_t degree(TxnId t) const;
    const std::set<TxnId> &neighbors(TxnId t) const;
    const Transaction &transaction(TxnId t) const;

    /// All vertices, ascending by id.
    std::vector<TxnId> vertices() const;

    /// Colored vertices with their colors, ascending by (color, id).
    std::vector<std::pair<Color, TxnId>> by_color() const;

    /// True when no edge joins two equal colors.
    bool is_proper() const;

private:
    struct Vertex
    {
        Transaction txn;
        std::set<TxnId> adj;
        std::optional<Color> color;
    };

    const Vertex &vertex(TxnId t) const;
    Vertex &vertex(TxnId t);
    void raise_floor();

    ConflictMode mode_;
    std::map<TxnId, Vertex> vertices_;
    std::unordered_set<TxnId> seen_;
    std::multiset<Color> colored_;
    std::size_t edges_ = 0;
    Color floor_ = 0;
};

} // namespace shardsched

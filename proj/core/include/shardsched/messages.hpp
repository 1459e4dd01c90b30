#pragma once

#include "shardsched/conflict_graph.hpp"
#include "shardsched/cover.hpp"
#include "shardsched/transaction.hpp"
#include "shardsched/types.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace shardsched
{

/// Total order used by destination queues. fields are compared first, then
/// the transaction id, then the coloring attempt.
struct PriorityKey
{
    std::array<std::int64_t, 4> fields{};
    TxnId txn;
    std::uint32_t attempt = 0;

    constexpr auto operator<=>(const PriorityKey &) const = default;
};

enum class KeyOrder : std::uint8_t
{
    /// (color, ts, txn id): single-leader ordering.
    ColorMajor,
    /// (ts, q, r, color, txn id): multi-leader ordering.
    TimestampMajor,
};

PriorityKey make_key(KeyOrder order, Tick ts, Height h, Color color, TxnId txn, std::uint32_t attempt = 0);

/// "Batch seq from cluster to dest must be applied first."
struct FrontierEntry
{
    ClusterId cluster;
    ShardId dest;
    std::uint64_t seq = 0;

    bool operator==(const FrontierEntry &) const = default;
};
using BatchFrontier = std::vector<FrontierEntry>;

namespace msg
{
struct Generate
{
    ShardId home;
};
struct SubmitTxn
{
    TxnId txn;
    ClusterId cluster;
};
/// Leader-local: color everything that arrived this tick.
struct ColorPending
{
    ClusterId cluster;
};
struct SubTxn
{
    TxnId txn;
    ClusterId cluster;
    std::uint32_t attempt = 0;
    PriorityKey key;
};
struct Cancel
{
    TxnId txn;
    ClusterId cluster;
    std::uint32_t attempt = 0;
};
struct Vote
{
    TxnId txn;
    ClusterId cluster;
    std::uint32_t attempt = 0;
    ShardId dest;
    std::uint32_t hold = 0;
    bool commit = false;
};
struct Confirm
{
    TxnId txn;
    std::uint32_t attempt = 0;
    bool commit = false;
};
struct Ignore
{
    TxnId txn;
    ClusterId cluster;
    std::uint32_t attempt = 0;
    ShardId dest;
    std::uint32_t hold = 0;
};
struct Ignored
{
    TxnId txn;
    std::uint32_t attempt = 0;
    std::uint32_t hold = 0;
};
struct Outcome
{
    TxnId txn;
    bool committed = false;
};
struct StateRequest
{
    ClusterId cluster;
    std::uint64_t round = 0;
    std::vector<AccountId> accounts;
    BatchFrontier wait_for;
};
struct StateResponse
{
    ClusterId cluster;
    std::uint64_t round = 0;
    ShardId from;
    std::vector<std::pair<AccountId, std::int64_t>> balances;
    /// Highest batch sequence number from the requesting cluster applied here.
    std::uint64_t applied = 0;
};
struct BatchEntry
{
    TxnId txn;
    std::vector<WriteOp> writes;
    PriorityKey key;
};
struct PrecommitBatch
{
    ClusterId cluster;
    ShardId dest;
    std::uint64_t seq = 0;
    std::vector<BatchEntry> entries;
};
/// Destination-local: consensus on a buffered batch completes.
struct ApplyBatch
{
    ClusterId cluster;
};
struct ControlRequest
{
    ClusterId from;
    ClusterId to;
};
struct ControlGrant
{
    ClusterId from;
    ClusterId to;
    BatchFrontier frontier;
    bool clean = true; // false: the sender keeps priority over the receiver
};
struct Timer
{
    ClusterId cluster;
    std::uint64_t tag = 0;
};
} // namespace msg

using Payload = std::variant<msg::Generate, msg::SubmitTxn, msg::ColorPending, msg::SubTxn, msg::Cancel, msg::Vote, msg::Confirm, msg::Ignore,
                             msg::Ignored, msg::Outcome, msg::StateRequest, msg::StateResponse, msg::PrecommitBatch, msg::ApplyBatch,
                             msg::ControlRequest, msg::ControlGrant, msg::Timer>;

std::string_view kind_name(const Payload &p);

/// Short human-readable rendering used in trace lines.
std::string summarize(const Payload &p);

} // namespace shardsched

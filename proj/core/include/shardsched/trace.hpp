#pragma once

#include "shardsched/cover.hpp"
#include "shardsched/messages.hpp"
#include "shardsched/transaction.hpp"
#include "shardsched/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shardsched
{

struct TraceRecord
{
    Tick time = 0;
    ShardId shard;
    std::string kind;
    std::string detail;
};

/// Lifecycle of one generated transaction.
struct TxnRecord
{
    Transaction txn;
    ClusterId cluster;
    Height height;
    Tick generated = 0;
    Tick submitted = kNever; // arrival at the leader
    Tick scheduled = kNever;
    Tick decided = kNever;
    Tick finalized = kNever;
    Tick outcome = kNever; // outcome delivered at home
    std::optional<bool> committed;
    std::uint32_t attempts = 0;
    std::optional<TxnId> retry_of;
    std::uint32_t destinations_resolved = 0;

    bool is_finalized() const noexcept { return finalized != kNever; }
};

/// One entry of a shard's local blockchain: a single confirmed subtransaction
/// (stateless) or a whole pre-commit batch (stateful).
struct Block
{
    ClusterId cluster;
    std::uint64_t seq = 0;
    Tick time = 0;
    std::vector<TxnId> txns;
};

/// A scheduling trigger of a stateful leader. Rounds with no transactions are
/// recorded with empty = true.
struct TriggerRecord
{
    ClusterId cluster;
    Tick time = 0;
    bool empty = false;
    bool pending = false; // leader had transactions waiting when it fired
};

struct RoundRecord
{
    ClusterId cluster;
    Tick trigger_time = 0;
    Tick ready_time = 0;
    std::uint32_t colors = 0;
    std::uint32_t lambda = 0;
};

struct ControlRecord
{
    Tick time = 0;
    ClusterId cluster;
    bool holding = false;
};

/// Destination queue transitions, for reconstructing queue contents offline.
struct QueueEvent
{
    enum class Kind : std::uint8_t
    {
        Arrive,
        Take,
        Remove,
    };
    Tick time = 0;
    ShardId dest;
    Kind kind = Kind::Arrive;
    PriorityKey key;
    ClusterId cluster;
};

/// Batch lifecycle at a destination (stateful).
struct BatchEvent
{
    enum class Kind : std::uint8_t
    {
        Arrive,
        Apply,
    };
    Tick time = 0;
    ShardId dest;
    Kind kind = Kind::Arrive;
    ClusterId cluster;
    std::uint64_t seq = 0;
    PriorityKey head; // smallest key in the batch
};

struct RunTrace
{
    std::string algorithm;
    bool stateful = false;
    std::vector<TraceRecord> records;
    std::vector<std::vector<Block>> chains; // per shard
    std::vector<TxnRecord> txns;            // indexed by txn id
    std::vector<TriggerRecord> triggers;
    std::vector<RoundRecord> rounds;
    std::vector<ControlRecord> control;
    std::vector<QueueEvent> queue_events;
    std::vector<BatchEvent> batch_events;
    std::map<ClusterId, std::uint32_t> lambda; // stateful leaders only
    std::map<std::string, std::uint64_t> messages_by_kind;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t messages_dropped = 0;
    std::size_t max_queue_length = 0;
    Tick end_time = 0;
    bool quiescent = true;

    /// Line-delimited export: "time shard kind detail".
    void write_lines(std::ostream &os) const;

    /// FNV-1a over the exported lines and the final chains.
    std::uint64_t hash() const;
};

std::string hex_hash(std::uint64_t h);

} // namespace shardsched

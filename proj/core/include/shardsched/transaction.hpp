#pragma once

#include "shardsched/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace shardsched
{

using AccountId = std::uint64_t;

/// Balance change on one account. A guarded write only applies when the
/// resulting balance stays non-negative ("balance >= amount" for a withdrawal).
struct WriteOp
{
    AccountId account = 0;
    std::int64_t delta = 0;
    bool guarded = false;

    bool operator==(const WriteOp &) const = default;
};

/// Everything a transaction does on one destination shard.
struct ShardAccess
{
    ShardId shard;
    std::vector<AccountId> reads;
    std::vector<WriteOp> writes;

    bool writes_any() const noexcept { return !writes.empty(); }
    bool operator==(const ShardAccess &) const = default;
};

enum class TxnStatus : std::uint8_t
{
    Pending,
    Scheduled,
    Precommitted,
    Committed,
    Aborted,
};

std::string_view to_string(TxnStatus s);

inline bool is_final(TxnStatus s) { return s == TxnStatus::Committed || s == TxnStatus::Aborted; }

struct Transaction
{
    TxnId id;
    Tick ts = 0;
    ShardId home;
    std::vector<ShardAccess> accesses; // ascending by shard, one entry per destination
    TxnStatus status = TxnStatus::Pending;

    std::vector<ShardId> destinations() const;
    const ShardAccess *access(ShardId shard) const;
};

/// Per-destination fragment of a transaction.
struct SubTransaction
{
    TxnId parent;
    ShardId dest;
    std::vector<AccountId> reads;
    std::vector<WriteOp> writes;
};

std::vector<SubTransaction> split(const Transaction &t);

} // namespace shardsched

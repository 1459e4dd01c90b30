#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace shardsched
{

/// Simulator clock reading, in time units. One unit is the traversal of a
/// unit-weight edge of the shard graph.
using Tick = std::int64_t;

/// Metric distance between shards. Same unit as Tick.
using Length = std::int64_t;

inline constexpr Tick kNever = std::numeric_limits<Tick>::max();

template <typename Tag, typename Rep = std::uint32_t>
struct StrongId
{
    Rep value{};

    constexpr StrongId() = default;
    constexpr explicit StrongId(Rep v) : value(v) {}

    constexpr auto operator<=>(const StrongId &) const = default;

    friend std::ostream &operator<<(std::ostream &os, StrongId id) { return os << id.value; }
};

struct ShardTag;
struct TxnTag;
struct ClusterTag;

using ShardId = StrongId<ShardTag, std::uint32_t>;
using TxnId = StrongId<TxnTag, std::uint64_t>;
using ClusterId = StrongId<ClusterTag, std::uint32_t>;

/// Raised for malformed configuration: bad topology, bad workload knobs,
/// unknown keys. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (out-of-range index, duplicate
/// insert, cancelling an uncolored vertex, ...).
class UsageError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// A scheduler handler observed a state that the protocol forbids. Aborts the
/// run with diagnostics.
class ProtocolViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace shardsched

template <typename Tag, typename Rep>
struct std::hash<shardsched::StrongId<Tag, Rep>>
{
    std::size_t operator()(shardsched::StrongId<Tag, Rep> id) const noexcept { return std::hash<Rep>{}(id.value); }
};

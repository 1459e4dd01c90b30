#pragma once

#include "shardsched/messages.hpp"
#include "shardsched/rng.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/trace.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace shardsched
{

/// Message delay between shards at distance w: exactly w when synchronous,
/// otherwise a seeded uniform integer in [w, stretch * w].
struct DelayModel
{
    std::int64_t stretch = 1;
    std::uint64_t seed = 0;

    static DelayModel synchronous() { return {}; }
    static DelayModel partial(std::int64_t stretch, std::uint64_t seed) { return {stretch, seed}; }

    bool is_synchronous() const noexcept { return stretch == 1; }
};

struct Envelope
{
    ShardId src;
    ShardId dst;
    Tick send_time = 0;
    Tick deliver_time = 0;
    Payload payload;
    bool network = true;
};

using TimerId = std::uint64_t;

/// Single-threaded discrete-event engine. Events pop by (time, insertion
/// sequence), so same-time events run in FIFO order and a zero-delay event
/// runs after everything already queued for the current tick.
class Engine
{
public:
    using Handler = std::function<void(const Envelope &)>;
    using DropFilter = std::function<bool(const Envelope &)>;

    Engine(const ShardGraph &graph, DelayModel delays, RunTrace &trace);

    Tick now() const noexcept { return now_; }

    /// Inter-shard message with a delay drawn from the delay model. src == dst
    /// is delivered at the current tick.
    void send(ShardId src, ShardId dst, Payload payload);

    /// Shard-local event at the current tick.
    void post(ShardId shard, Payload payload) { post_at(shard, now_, std::move(payload)); }

    /// Shard-local event at a future tick.
    void post_at(ShardId shard, Tick at, Payload payload);

    TimerId set_timer(ShardId shard, Tick fire_time, Payload payload);
    void cancel_timer(TimerId id);

    /// Appends a scheduler-level record to the trace at the current tick.
    void note(ShardId shard, std::string kind, std::string detail);

    /// Fault injection: matching network messages are silently discarded.
    void set_drop_filter(DropFilter filter) { drop_ = std::move(filter); }

    /// Processes events until the queue drains or the next event lies beyond
    /// horizon. Returns the final clock.
    Tick run(const Handler &handler, Tick horizon);

    std::size_t pending() const noexcept { return queue_.size(); }

private:
    struct Event
    {
        Tick time;
        std::uint64_t seq;
        Envelope env;
        TimerId timer = 0;
    };
    struct Later
    {
        bool operator()(const Event &a, const Event &b) const { return a.time != b.time ? a.time > b.time : a.seq > b.seq; }
    };

    void push(Envelope env, TimerId timer = 0);

    const ShardGraph &graph_;
    DelayModel delays_;
    Rng rng_;
    RunTrace &trace_;
    Tick now_ = 0;
    std::uint64_t seq_ = 0;
    TimerId next_timer_ = 1;
    std::unordered_set<TimerId> cancelled_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    DropFilter drop_;
};

} // namespace shardsched

#include "shardsched/engine.hpp"

namespace shardsched
{

Engine::Engine(const ShardGraph &graph, DelayModel delays, RunTrace &trace)
    : graph_(graph), delays_(delays), rng_(derive_seed(delays.seed, 0xde1a)), trace_(trace)
{
    if (delays_.stretch < 1)
    {
        throw ConfigError("delay: stretch must be at least 1");
    }
}

void Engine::push(Envelope env, TimerId timer)
{
    const Tick t = env.deliver_time;
    queue_.push(Event{t, seq_++, std::move(env), timer});
}

void Engine::send(ShardId src, ShardId dst, Payload payload)
{
    const Length w = graph_.distance(src, dst);
    Tick delay = w;
    if (!delays_.is_synchronous() && w > 0)
    {
        delay = rng_.between(w, delays_.stretch * w);
    }
    ++trace_.messages_sent;
    if (src != dst)
    {
        ++trace_.messages_by_kind[std::string(kind_name(payload))];
    }
    push(Envelope{src, dst, now_, now_ + delay, std::move(payload), true});
}

void Engine::post_at(ShardId shard, Tick at, Payload payload)
{
    if (at < now_)
    {
        throw UsageError("post_at: event time lies in the past");
    }
    push(Envelope{shard, shard, now_, at, std::move(payload), false});
}

TimerId Engine::set_timer(ShardId shard, Tick fire_time, Payload payload)
{
    if (fire_time < now_)
    {
        throw UsageError("set_timer: fire time lies in the past");
    }
    const TimerId id = next_timer_++;
    push(Envelope{shard, shard, now_, fire_time, std::move(payload), false}, id);
    return id;
}

void Engine::cancel_timer(TimerId id)
{
    if (id != 0)
    {
        cancelled_.insert(id);
    }
}

void Engine::note(ShardId shard, std::string kind, std::string detail)
{
    trace_.records.push_back(TraceRecord{now_, shard, std::move(kind), std::move(detail)});
}

Tick Engine::run(const Handler &handler, Tick horizon)
{
    trace_.quiescent = true;
    while (!queue_.empty())
    {
        if (queue_.top().time > horizon)
        {
            trace_.quiescent = false;
            break;
        }
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        if (ev.timer != 0)
        {
            if (cancelled_.erase(ev.timer) != 0)
            {
                continue;
            }
        }
        const Envelope &env = ev.env;
        if (env.network)
        {
            const Length w = graph_.distance(env.src, env.dst);
            const Tick delay = env.deliver_time - env.send_time;
            if (delay < w || delay > delays_.stretch * w)
            {
                throw ProtocolViolation("delivery outside delay bounds: " + std::string(kind_name(env.payload)));
            }
            if (drop_ && drop_(env))
            {
                ++trace_.messages_dropped;
                note(env.dst, "drop", std::string(kind_name(env.payload)) + " " + summarize(env.payload));
                continue;
            }
            ++trace_.messages_delivered;
        }
        trace_.records.push_back(TraceRecord{now_, env.dst, std::string(kind_name(env.payload)),
                                             summarize(env.payload) + (env.network ? " from=" + std::to_string(env.src.value) : "")});
        handler(env);
    }
    trace_.end_time = now_;
    if (trace_.quiescent && trace_.messages_sent != trace_.messages_delivered + trace_.messages_dropped)
    {
        throw ProtocolViolation("engine quiescent with undelivered messages");
    }
    return now_;
}

} // namespace shardsched

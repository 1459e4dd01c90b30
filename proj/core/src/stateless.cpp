// Stateless schedulers (single leader and per-cluster leaders). The leader
// colors its conflict graph and ships keyed subtransactions; destinations
// validate one subtransaction at a time and vote; the leader confirms.

#include "protocol.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace shardsched::detail
{

namespace
{

std::string txn_text(TxnId id) { return "txn=" + std::to_string(id.value); }

class StatelessProtocol : public Protocol
{
public:
    explicit StatelessProtocol(World &w) : w_(w), dests_(w.graph.size()) {}

    void on_submit(ClusterId cluster, TxnId id) override
    {
        Leader &L = leader(cluster);
        L.arrivals.push_back(id);
        if (!L.color_posted)
        {
            L.color_posted = true;
            w_.engine.post(w_.cluster(cluster).leader, msg::ColorPending{cluster});
        }
    }

    void handle(const Envelope &env) override
    {
        std::visit(
            [&](const auto &m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, msg::ColorPending>)
                {
                    color_pending(m.cluster);
                }
                else if constexpr (std::is_same_v<M, msg::SubTxn>)
                {
                    on_subtxn(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::Cancel>)
                {
                    on_cancel(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::Vote>)
                {
                    on_vote(m);
                }
                else if constexpr (std::is_same_v<M, msg::Confirm>)
                {
                    on_confirm(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::Ignore>)
                {
                    on_ignore(m);
                }
                else if constexpr (std::is_same_v<M, msg::Ignored>)
                {
                    on_ignored(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::Timer>)
                {
                    dests_[env.dst.value].wake_posted = false;
                    pump(env.dst);
                }
                else
                {
                    throw ProtocolViolation("stateless scheduler got unexpected " + std::string(kind_name(env.payload)));
                }
            },
            env.payload);
    }

private:
    struct Live
    {
        std::uint32_t attempt = 0;
        std::uint32_t received = 0; // votes accepted for the current attempt
        std::map<ShardId, bool> votes;
        std::map<ShardId, std::uint32_t> ignored_upto;
    };

    struct Leader
    {
        explicit Leader(ConflictMode mode) : graph(mode) {}
        ConflictGraph graph;
        std::vector<TxnId> arrivals;
        bool color_posted = false;
        std::map<TxnId, Live> live;
    };

    struct InFlight
    {
        PriorityKey key;
        ClusterId cluster;
        std::uint32_t hold = 0;
        bool ignore_sent = false;
    };

    struct Dest
    {
        std::map<PriorityKey, ClusterId> queue;
        std::optional<InFlight> busy;
        std::unordered_map<TxnId, std::uint32_t> min_attempt;
        std::unordered_set<TxnId> dead;
        std::uint32_t holds = 0;
        Tick free_at = 0; // one resolved subtransaction per time slot
        bool wake_posted = false;
    };

    Leader &leader(ClusterId c)
    {
        auto it = leaders_.find(c);
        if (it == leaders_.end())
        {
            it = leaders_.emplace(c, Leader(w_.cfg.conflict)).first;
        }
        return it->second;
    }

    ShardId leader_shard(ClusterId c) const { return w_.cluster(c).leader; }

    bool earlier(TxnId a, TxnId b) const
    {
        const Tick ta = w_.txn(a).ts;
        const Tick tb = w_.txn(b).ts;
        return ta != tb ? ta < tb : a < b;
    }

    // ---- leader side ----

    void color_pending(ClusterId cluster)
    {
        Leader &L = leader(cluster);
        L.color_posted = false;
        std::vector<TxnId> arrivals = std::move(L.arrivals);
        L.arrivals.clear();
        std::sort(arrivals.begin(), arrivals.end(), [&](TxnId a, TxnId b) { return earlier(a, b); });

        for (TxnId id : arrivals)
        {
            L.graph.extend(w_.txn(id));
            L.live.emplace(id, Live{});
        }
        // A newer colored neighbour nobody has voted on yet gives way.
        for (TxnId id : arrivals)
        {
            const Tick ts = w_.txn(id).ts;
            for (TxnId nb : L.graph.neighbors(id))
            {
                Live &st = L.live.at(nb);
                if (L.graph.color(nb) && w_.txn(nb).ts > ts && st.received == 0)
                {
                    cancel(cluster, L, nb);
                }
            }
        }
        std::vector<TxnId> uncolored;
        for (const auto &[id, st] : L.live)
        {
            if (!L.graph.color(id))
            {
                uncolored.push_back(id);
            }
        }
        std::sort(uncolored.begin(), uncolored.end(), [&](TxnId a, TxnId b) { return earlier(a, b); });
        for (TxnId id : uncolored)
        {
            assign(cluster, L, id);
        }
    }

    void cancel(ClusterId cluster, Leader &L, TxnId id)
    {
        L.graph.cancel_color(id);
        L.graph.set_status(id, TxnStatus::Pending);
        const Live &st = L.live.at(id);
        w_.engine.note(leader_shard(cluster), "cancel-color", txn_text(id) + " attempt=" + std::to_string(st.attempt));
        for (const auto &a : w_.txn(id).accesses)
        {
            w_.engine.send(leader_shard(cluster), a.shard, msg::Cancel{id, cluster, st.attempt});
        }
        w_.record(id).txn.status = TxnStatus::Pending;
    }

    void assign(ClusterId cluster, Leader &L, TxnId id)
    {
        const Color c = L.graph.greedy_color(id, L.graph.color_floor());
        L.graph.set_status(id, TxnStatus::Scheduled);
        Live &st = L.live.at(id);
        ++st.attempt;
        st.received = 0;
        st.votes.clear();
        st.ignored_upto.clear();

        TxnRecord &r = w_.record(id);
        if (r.scheduled == kNever)
        {
            r.scheduled = w_.now();
        }
        r.attempts = st.attempt;
        r.txn.status = TxnStatus::Scheduled;
        const LeaderView &view = w_.cluster(cluster);
        const PriorityKey key = make_key(w_.order, r.txn.ts, view.height, c, id, st.attempt);
        w_.engine.note(view.leader, "color", txn_text(id) + " color=" + std::to_string(c) + " attempt=" + std::to_string(st.attempt));
        for (const auto &a : r.txn.accesses)
        {
            w_.engine.send(view.leader, a.shard, msg::SubTxn{id, cluster, st.attempt, key});
        }
    }

    void on_vote(const msg::Vote &m)
    {
        Leader &L = leader(m.cluster);
        const ShardId here = leader_shard(m.cluster);
        auto it = L.live.find(m.txn);
        if (it == L.live.end())
        {
            w_.engine.note(here, "late-vote", txn_text(m.txn));
            return;
        }
        Live &st = it->second;
        if (m.attempt != st.attempt)
        {
            w_.engine.note(here, "stale-vote", txn_text(m.txn));
            return;
        }
        auto ig = st.ignored_upto.find(m.dest);
        if (ig != st.ignored_upto.end() && m.hold <= ig->second)
        {
            w_.engine.note(here, "discarded-vote", txn_text(m.txn));
            return;
        }
        if (st.votes.count(m.dest) != 0)
        {
            w_.engine.note(here, "duplicate-vote", txn_text(m.txn));
            return;
        }
        ++st.received;
        st.votes[m.dest] = m.commit;
        if (!m.commit)
        {
            decide(m.cluster, L, m.txn, false);
        }
        else if (st.votes.size() == w_.txn(m.txn).accesses.size())
        {
            decide(m.cluster, L, m.txn, true);
        }
    }

    void decide(ClusterId cluster, Leader &L, TxnId id, bool commit)
    {
        const Live st = L.live.at(id);
        const ShardId here = leader_shard(cluster);
        for (const auto &a : w_.txn(id).accesses)
        {
            w_.engine.send(here, a.shard, msg::Confirm{id, st.attempt, commit});
        }
        L.graph.set_status(id, commit ? TxnStatus::Committed : TxnStatus::Aborted);
        L.graph.remove(L.graph.transaction(id));
        L.live.erase(id);
        w_.decide(id, here, commit, false);
    }

    void on_ignore(const msg::Ignore &m)
    {
        Leader &L = leader(m.cluster);
        auto it = L.live.find(m.txn);
        if (it == L.live.end() || it->second.attempt != m.attempt)
        {
            return; // decided, or superseded by a cancel already on its way
        }
        Live &st = it->second;
        std::uint32_t &upto = st.ignored_upto[m.dest];
        upto = std::max(upto, m.hold);
        st.votes.erase(m.dest);
        w_.engine.send(leader_shard(m.cluster), m.dest, msg::Ignored{m.txn, m.attempt, m.hold});
    }

    // ---- destination side ----

    void record_queue(ShardId dest, QueueEvent::Kind kind, const PriorityKey &key, ClusterId cluster)
    {
        w_.trace.queue_events.push_back(QueueEvent{w_.now(), dest, kind, key, cluster});
    }

    // Drops every queued or in-flight entry of txn with attempt <= upto.
    void purge(ShardId dest, TxnId txn, std::uint32_t upto)
    {
        Dest &D = dests_[dest.value];
        for (auto it = D.queue.begin(); it != D.queue.end();)
        {
            if (it->first.txn == txn && it->first.attempt <= upto)
            {
                record_queue(dest, QueueEvent::Kind::Remove, it->first, it->second);
                it = D.queue.erase(it);
            }
            else
            {
                ++it;
            }
        }
        if (D.busy && D.busy->key.txn == txn && D.busy->key.attempt <= upto)
        {
            w_.engine.note(dest, "drop-inflight", txn_text(txn));
            D.busy.reset();
        }
    }

    void on_subtxn(ShardId dest, const msg::SubTxn &m)
    {
        Dest &D = dests_[dest.value];
        auto floor = D.min_attempt.find(m.txn);
        if (D.dead.count(m.txn) != 0 || (floor != D.min_attempt.end() && m.attempt < floor->second))
        {
            w_.engine.note(dest, "stale-subtxn", txn_text(m.txn));
            return;
        }
        purge(dest, m.txn, m.attempt - 1);
        D.min_attempt[m.txn] = m.attempt;
        D.queue.emplace(m.key, m.cluster);
        record_queue(dest, QueueEvent::Kind::Arrive, m.key, m.cluster);
        w_.trace.max_queue_length = std::max(w_.trace.max_queue_length, D.queue.size());
        if (D.busy && !D.busy->ignore_sent && m.key < D.busy->key)
        {
            D.busy->ignore_sent = true;
            const InFlight &f = *D.busy;
            w_.engine.send(dest, leader_shard(f.cluster), msg::Ignore{f.key.txn, f.cluster, f.key.attempt, dest, f.hold});
        }
        pump(dest);
    }

    void pump(ShardId dest)
    {
        Dest &D = dests_[dest.value];
        if (D.busy || D.queue.empty())
        {
            return;
        }
        if (w_.now() < D.free_at)
        {
            if (!D.wake_posted)
            {
                D.wake_posted = true;
                w_.engine.post_at(dest, D.free_at, msg::Timer{ClusterId{0}, 0});
            }
            return;
        }
        auto head = D.queue.begin();
        InFlight f{head->first, head->second, ++D.holds, false};
        D.queue.erase(head);
        record_queue(dest, QueueEvent::Kind::Take, f.key, f.cluster);
        D.busy = f;

        const ShardAccess *acc = w_.txn(f.key.txn).access(dest);
        const bool ok = writes_hold(acc->writes, [&](AccountId a) { return w_.balance(a); });
        w_.engine.send(dest, leader_shard(f.cluster), msg::Vote{f.key.txn, f.cluster, f.key.attempt, dest, f.hold, ok});
    }

    void on_cancel(ShardId dest, const msg::Cancel &m)
    {
        Dest &D = dests_[dest.value];
        std::uint32_t &floor = D.min_attempt[m.txn];
        floor = std::max(floor, m.attempt + 1);
        purge(dest, m.txn, m.attempt);
        pump(dest);
    }

    void on_confirm(ShardId dest, const msg::Confirm &m)
    {
        Dest &D = dests_[dest.value];
        if (D.busy && D.busy->key.txn == m.txn && D.busy->key.attempt == m.attempt)
        {
            if (m.commit)
            {
                for (const WriteOp &op : w_.txn(m.txn).access(dest)->writes)
                {
                    std::int64_t &b = w_.balance(op.account);
                    b += op.delta;
                    if (op.guarded && b < 0)
                    {
                        throw ProtocolViolation("negative balance after committing " + txn_text(m.txn));
                    }
                }
                auto &chain = w_.trace.chains[dest.value];
                chain.push_back(Block{D.busy->cluster, chain.size(), w_.now(), {m.txn}});
            }
            D.busy.reset();
            D.free_at = w_.now() + 1;
            w_.resolve(m.txn);
            pump(dest);
            return;
        }
        if (m.commit)
        {
            throw ProtocolViolation("confirmed commit for " + txn_text(m.txn) + " which is not in flight at shard " + std::to_string(dest.value));
        }
        D.dead.insert(m.txn);
        purge(dest, m.txn, UINT32_MAX);
        w_.resolve(m.txn);
        pump(dest);
    }

    void on_ignored(ShardId dest, const msg::Ignored &m)
    {
        Dest &D = dests_[dest.value];
        if (!D.busy || D.busy->key.txn != m.txn || D.busy->key.attempt != m.attempt || D.busy->hold != m.hold)
        {
            return;
        }
        D.queue.emplace(D.busy->key, D.busy->cluster);
        record_queue(dest, QueueEvent::Kind::Arrive, D.busy->key, D.busy->cluster);
        D.busy.reset();
        pump(dest);
    }

    World &w_;
    std::map<ClusterId, Leader> leaders_;
    std::vector<Dest> dests_;
};

} // namespace

std::unique_ptr<Protocol> make_stateless(World &world) { return std::make_unique<StatelessProtocol>(world); }

} // namespace shardsched::detail

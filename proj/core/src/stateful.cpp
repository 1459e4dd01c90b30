// Stateful schedulers. A leader periodically gathers the account states its
// pending transactions touch, colors them, pre-commits color by color against
// the gathered state and ships ordered batches that destinations append after
// one unit of consensus.
//
// With one leader per cluster, overlapping clusters must not run rounds at the
// same time. Every pair of overlapping clusters at different heights shares a
// fork (Chandy-Misra style); a cluster holds scheduling control while it holds
// all of its forks. Forks start dirty at the lower cluster, so height (0,0)
// clusters hold control from the start.

#include "protocol.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace shardsched::detail
{

namespace
{

constexpr std::uint64_t kCadenceTimer = 1;

class StatefulProtocol : public Protocol
{
public:
    StatefulProtocol(World &w, const CoverHierarchy *cover) : w_(w), dests_(w.graph.size())
    {
        multi_ = is_multi_leader(w_.cfg.algorithm);
        for (const LeaderView &v : w_.clusters)
        {
            Leader L(w_.cfg.conflict);
            L.id = v.id;
            L.lambda = w_.cfg.lambda ? std::max<std::uint32_t>(1, *w_.cfg.lambda) : stateful_lambda(w_.stretch, multi_ ? v.diameter : w_.graph.diameter());
            w_.trace.lambda[v.id] = L.lambda;
            leaders_.push_back(std::move(L));
        }
        if (multi_)
        {
            place_forks(*cover);
        }
    }

    void on_submit(ClusterId cluster, TxnId id) override
    {
        Leader &L = leader(cluster);
        L.pq.push_back(id);
        if (!L.timer && !L.in_round && !L.hungry)
        {
            arm(L, std::max(w_.now(), L.last_trigger + 4 * static_cast<Tick>(L.lambda)));
        }
    }

    void handle(const Envelope &env) override
    {
        std::visit(
            [&](const auto &m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, msg::Timer>)
                {
                    on_timer(m);
                }
                else if constexpr (std::is_same_v<M, msg::StateRequest>)
                {
                    on_state_request(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::StateResponse>)
                {
                    on_state_response(m);
                }
                else if constexpr (std::is_same_v<M, msg::PrecommitBatch>)
                {
                    on_batch(env.dst, m);
                }
                else if constexpr (std::is_same_v<M, msg::ApplyBatch>)
                {
                    on_apply(env.dst, m.cluster);
                }
                else if constexpr (std::is_same_v<M, msg::ControlRequest>)
                {
                    on_control_request(m);
                }
                else if constexpr (std::is_same_v<M, msg::ControlGrant>)
                {
                    on_control_grant(m);
                }
                else
                {
                    throw ProtocolViolation("stateful scheduler got unexpected " + std::string(kind_name(env.payload)));
                }
            },
            env.payload);
    }

private:
    struct Fork
    {
        bool have = false;
        bool dirty = true;
        bool requested = false; // the other side wants it
        bool asked = false;     // we asked for it and have not received it yet
        bool parent = false;    // the other side is higher
    };

    struct Leader
    {
        explicit Leader(ConflictMode mode) : graph(mode) {}

        ClusterId id;
        std::uint32_t lambda = 1;
        std::vector<TxnId> pq;
        ConflictGraph graph; // the scheduled set
        TimerId timer = 0;
        Tick last_trigger = 0;
        bool in_round = false;
        bool due = false;
        bool hungry = false;

        std::uint64_t round = 0;
        Tick round_start = 0;
        std::vector<TxnId> fresh;
        std::size_t awaiting = 0;
        std::map<ShardId, msg::StateResponse> responses;

        std::map<ShardId, std::uint64_t> next_seq;
        std::map<ShardId, std::map<std::uint64_t, std::map<AccountId, std::int64_t>>> unapplied;
        std::map<std::pair<ClusterId, ShardId>, std::uint64_t> frontier;

        std::map<ClusterId, Fork> forks;
        bool holding = true;
    };

    struct Deferred
    {
        ShardId from;
        msg::StateRequest req;
    };

    struct Dest
    {
        std::map<ClusterId, std::uint64_t> applied;
        std::map<ClusterId, std::map<std::uint64_t, msg::PrecommitBatch>> buffer;
        std::set<ClusterId> applying;
        std::vector<Deferred> deferred;
    };

    Leader &leader(ClusterId c) { return leaders_.at(c.value); }
    ShardId leader_shard(ClusterId c) const { return w_.cluster(c).leader; }
    bool has_work(const Leader &L) const { return !L.pq.empty() || L.graph.vertex_count() != 0; }

    void arm(Leader &L, Tick at)
    {
        w_.engine.cancel_timer(L.timer);
        L.timer = w_.engine.set_timer(leader_shard(L.id), at, msg::Timer{L.id, kCadenceTimer});
    }

    // ---- control ----

    void place_forks(const CoverHierarchy &cover)
    {
        const auto &cs = cover.clusters();
        for (std::size_t i = 0; i < cs.size(); ++i)
        {
            for (std::size_t j = i + 1; j < cs.size(); ++j)
            {
                const Cluster &a = cs[i];
                const Cluster &b = cs[j];
                if (a.height == b.height)
                {
                    continue;
                }
                std::vector<ShardId> common;
                std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(), std::back_inserter(common));
                if (common.empty())
                {
                    continue;
                }
                const bool a_low = a.height < b.height;
                Fork fa;
                fa.have = a_low;
                fa.parent = !a_low;
                Fork fb;
                fb.have = !a_low;
                fb.parent = a_low;
                leader(a.id).forks[b.id] = fa;
                leader(b.id).forks[a.id] = fb;
            }
        }
        for (Leader &L : leaders_)
        {
            L.holding = holds_all(L);
            if (L.holding)
            {
                w_.trace.control.push_back(ControlRecord{0, L.id, true});
            }
        }
    }

    static bool holds_all(const Leader &L)
    {
        return std::all_of(L.forks.begin(), L.forks.end(), [](const auto &kv) { return kv.second.have; });
    }

    void update_holding(Leader &L)
    {
        const bool now_holding = holds_all(L);
        if (now_holding == L.holding)
        {
            return;
        }
        L.holding = now_holding;
        w_.trace.control.push_back(ControlRecord{w_.now(), L.id, now_holding});
        if (now_holding)
        {
            for (const auto &[other, f] : L.forks)
            {
                if (leader(other).holding)
                {
                    throw ProtocolViolation("clusters " + std::to_string(L.id.value) + " and " + std::to_string(other.value) +
                                            " hold scheduling control at the same time");
                }
            }
        }
    }

    void request_missing(Leader &L)
    {
        for (auto &[other, f] : L.forks)
        {
            if (!f.have && !f.asked)
            {
                f.asked = true;
                w_.engine.send(leader_shard(L.id), leader_shard(other), msg::ControlRequest{L.id, other});
            }
        }
    }

    BatchFrontier frontier_of(const Leader &L) const
    {
        BatchFrontier out;
        for (const auto &[key, seq] : L.frontier)
        {
            out.push_back(FrontierEntry{key.first, key.second, seq});
        }
        return out;
    }

    void give(Leader &L, ClusterId other)
    {
        // The receiver gets a clean fork exactly when ours was dirty, so the
        // priority between the two sides only changes when one of them eats.
        Fork &f = L.forks.at(other);
        const bool clean = f.dirty;
        f.have = false;
        f.requested = false;
        f.dirty = false;
        w_.engine.send(leader_shard(L.id), leader_shard(other), msg::ControlGrant{L.id, other, frontier_of(L), clean});
        update_holding(L);
    }

    void maybe_release(Leader &L, ClusterId other)
    {
        Fork &f = L.forks.at(other);
        if (!f.have || !f.requested || L.in_round || (!f.dirty && L.hungry))
        {
            return;
        }
        give(L, other);
        if (L.hungry)
        {
            f.asked = true;
            w_.engine.send(leader_shard(L.id), leader_shard(other), msg::ControlRequest{L.id, other});
        }
    }

    void on_control_request(const msg::ControlRequest &m)
    {
        Leader &L = leader(m.to);
        L.forks.at(m.from).requested = true;
        maybe_release(L, m.from);
    }

    void on_control_grant(const msg::ControlGrant &m)
    {
        Leader &L = leader(m.to);
        for (const FrontierEntry &e : m.frontier)
        {
            std::uint64_t &seq = L.frontier[{e.cluster, e.dest}];
            seq = std::max(seq, e.seq);
        }
        Fork &f = L.forks.at(m.from);
        f.have = true;
        f.dirty = !m.clean;
        f.asked = false;
        update_holding(L);
        if (L.hungry && !L.in_round && L.holding)
        {
            start_round(L);
            return;
        }
        maybe_release(L, m.from);
    }

    void finish_eating(Leader &L, bool again)
    {
        L.hungry = false;
        std::vector<ClusterId> order;
        for (auto &[other, f] : L.forks)
        {
            f.dirty = true;
        }
        for (const auto &[other, f] : L.forks)
        {
            if (f.parent)
            {
                order.push_back(other);
            }
        }
        for (const auto &[other, f] : L.forks)
        {
            if (!f.parent)
            {
                order.push_back(other);
            }
        }
        for (ClusterId other : order)
        {
            maybe_release(L, other);
        }
        if (!again && !has_work(L))
        {
            // nothing left here: hand control down
            for (ClusterId other : order)
            {
                const Fork &f = L.forks.at(other);
                if (!f.parent && f.have)
                {
                    give(L, other);
                }
            }
        }
    }

    // ---- rounds ----

    void on_timer(const msg::Timer &m)
    {
        Leader &L = leader(m.cluster);
        L.timer = 0;
        if (L.in_round || L.hungry)
        {
            L.due = true;
            return;
        }
        trigger(L);
    }

    void trigger(Leader &L)
    {
        L.due = false;
        if (!has_work(L))
        {
            w_.trace.triggers.push_back(TriggerRecord{L.id, w_.now(), true, false});
            L.last_trigger = w_.now();
            return; // dormant until the next submission
        }
        if (multi_ && !L.holding)
        {
            L.hungry = true;
            request_missing(L);
            return;
        }
        start_round(L);
    }

    void start_round(Leader &L)
    {
        const ShardId here = leader_shard(L.id);
        L.hungry = multi_;
        L.due = false;
        L.in_round = true;
        ++L.round;
        L.round_start = w_.now();
        L.last_trigger = w_.now();
        w_.trace.triggers.push_back(TriggerRecord{L.id, w_.now(), false, true});
        arm(L, w_.now() + 4 * static_cast<Tick>(L.lambda));

        L.fresh = std::move(L.pq);
        L.pq.clear();
        std::map<ShardId, std::set<AccountId>> wanted;
        auto collect = [&](TxnId id) {
            for (const auto &a : w_.txn(id).accesses)
            {
                auto &s = wanted[a.shard];
                s.insert(a.reads.begin(), a.reads.end());
                for (const WriteOp &op : a.writes)
                {
                    s.insert(op.account);
                }
            }
        };
        for (TxnId id : L.fresh)
        {
            collect(id);
        }
        for (TxnId id : L.graph.vertices())
        {
            collect(id);
        }
        L.responses.clear();
        L.awaiting = wanted.size();
        w_.engine.note(here, "round", "cluster=" + std::to_string(L.id.value) + " round=" + std::to_string(L.round) +
                                          " shards=" + std::to_string(wanted.size()));
        for (const auto &[shard, accs] : wanted)
        {
            msg::StateRequest req{L.id, L.round, std::vector<AccountId>(accs.begin(), accs.end()), {}};
            for (const auto &[key, seq] : L.frontier)
            {
                if (key.second == shard && key.first != L.id)
                {
                    req.wait_for.push_back(FrontierEntry{key.first, key.second, seq});
                }
            }
            w_.engine.send(here, shard, std::move(req));
        }
    }

    void on_state_response(const msg::StateResponse &m)
    {
        Leader &L = leader(m.cluster);
        if (!L.in_round || m.round != L.round)
        {
            throw ProtocolViolation("state response for a round that is not running");
        }
        L.responses[m.from] = m;
        if (--L.awaiting == 0)
        {
            state_ready(L);
        }
    }

    void state_ready(Leader &L)
    {
        const ShardId here = leader_shard(L.id);
        const LeaderView &view = w_.cluster(L.id);

        // Working state: reported balances plus our own batches still in flight.
        std::map<AccountId, std::int64_t> working;
        for (const auto &[shard, resp] : L.responses)
        {
            for (auto [acc, bal] : resp.balances)
            {
                working[acc] = bal;
            }
            auto &mine = L.unapplied[shard];
            mine.erase(mine.begin(), mine.upper_bound(resp.applied));
            for (const auto &[seq, deltas] : mine)
            {
                for (auto [acc, d] : deltas)
                {
                    auto it = working.find(acc);
                    if (it != working.end())
                    {
                        it->second += d;
                    }
                }
            }
        }

        std::sort(L.fresh.begin(), L.fresh.end(), [&](TxnId a, TxnId b) {
            const Tick ta = w_.txn(a).ts;
            const Tick tb = w_.txn(b).ts;
            return ta != tb ? ta < tb : a < b;
        });
        for (TxnId id : L.fresh)
        {
            L.graph.extend(w_.txn(id));
            const Color c = L.graph.greedy_color(id, L.graph.color_floor());
            L.graph.set_status(id, TxnStatus::Scheduled);
            TxnRecord &r = w_.record(id);
            r.scheduled = w_.now();
            r.attempts = 1;
            r.txn.status = TxnStatus::Scheduled;
            w_.engine.note(here, "color", "txn=" + std::to_string(id.value) + " color=" + std::to_string(c));
        }
        L.fresh.clear();

        std::map<ShardId, std::vector<msg::BatchEntry>> batches;
        std::map<ShardId, std::map<AccountId, std::int64_t>> deltas;
        std::uint32_t colors = 0;
        std::optional<Color> current;
        for (auto [color, id] : L.graph.by_color())
        {
            if (color != current)
            {
                if (colors == L.lambda)
                {
                    break;
                }
                current = color;
                ++colors;
            }
            const Transaction &t = w_.txn(id);
            bool ok = true;
            for (const auto &a : t.accesses)
            {
                ok = ok && writes_hold(a.writes, [&](AccountId acc) { return working.at(acc); });
            }
            const PriorityKey key = make_key(w_.order, t.ts, view.height, color, id, 1);
            if (ok)
            {
                for (const auto &a : t.accesses)
                {
                    for (const WriteOp &op : a.writes)
                    {
                        working.at(op.account) += op.delta;
                        deltas[a.shard][op.account] += op.delta;
                    }
                    batches[a.shard].push_back(msg::BatchEntry{id, a.writes, key});
                }
            }
            L.graph.set_status(id, ok ? TxnStatus::Committed : TxnStatus::Aborted);
            L.graph.remove(L.graph.transaction(id));
            w_.decide(id, here, ok, !ok);
        }

        for (auto &[shard, entries] : batches)
        {
            const std::uint64_t seq = ++L.next_seq[shard];
            L.unapplied[shard][seq] = std::move(deltas[shard]);
            L.frontier[{L.id, shard}] = seq;
            w_.engine.send(here, shard, msg::PrecommitBatch{L.id, shard, seq, std::move(entries)});
        }
        w_.trace.rounds.push_back(RoundRecord{L.id, L.round_start, w_.now(), colors, L.lambda});
        L.in_round = false;

        const bool again = has_work(L) && (L.due || colors == L.lambda);
        if (multi_)
        {
            finish_eating(L, again);
        }
        if (again)
        {
            trigger(L);
        }
        else if (L.due)
        {
            trigger(L);
        }
    }

    // ---- destination side ----

    bool satisfied(const Dest &D, const BatchFrontier &wait_for) const
    {
        for (const FrontierEntry &e : wait_for)
        {
            auto it = D.applied.find(e.cluster);
            if (it == D.applied.end() || it->second < e.seq)
            {
                return false;
            }
        }
        return true;
    }

    void respond(ShardId dest, const msg::StateRequest &req)
    {
        Dest &D = dests_[dest.value];
        msg::StateResponse resp{req.cluster, req.round, dest, {}, 0};
        for (AccountId a : req.accounts)
        {
            resp.balances.emplace_back(a, w_.balance(a));
        }
        auto it = D.applied.find(req.cluster);
        resp.applied = it == D.applied.end() ? 0 : it->second;
        w_.engine.send(dest, leader_shard(req.cluster), std::move(resp));
    }

    void on_state_request(ShardId dest, const msg::StateRequest &m)
    {
        Dest &D = dests_[dest.value];
        if (satisfied(D, m.wait_for))
        {
            respond(dest, m);
            return;
        }
        w_.engine.note(dest, "defer-state", "cluster=" + std::to_string(m.cluster.value));
        D.deferred.push_back(Deferred{dest, m});
    }

    void on_batch(ShardId dest, const msg::PrecommitBatch &m)
    {
        Dest &D = dests_[dest.value];
        const PriorityKey head = m.entries.empty() ? PriorityKey{} : m.entries.front().key;
        w_.trace.batch_events.push_back(BatchEvent{w_.now(), dest, BatchEvent::Kind::Arrive, m.cluster, m.seq, head});
        D.buffer[m.cluster].emplace(m.seq, m);
        std::size_t buffered = 0;
        for (const auto &[c, b] : D.buffer)
        {
            buffered += b.size();
        }
        w_.trace.max_queue_length = std::max(w_.trace.max_queue_length, buffered);
        schedule_apply(dest, m.cluster);
    }

    void schedule_apply(ShardId dest, ClusterId cluster)
    {
        Dest &D = dests_[dest.value];
        const auto &buf = D.buffer[cluster];
        if (D.applying.count(cluster) != 0 || buf.count(D.applied[cluster] + 1) == 0)
        {
            return;
        }
        D.applying.insert(cluster);
        w_.engine.post_at(dest, w_.now() + 1, msg::ApplyBatch{cluster}); // one unit of consensus
    }

    void on_apply(ShardId dest, ClusterId cluster)
    {
        Dest &D = dests_[dest.value];
        D.applying.erase(cluster);
        auto &buf = D.buffer[cluster];
        const std::uint64_t seq = D.applied[cluster] + 1;
        auto node = buf.extract(seq);
        if (node.empty())
        {
            throw ProtocolViolation("apply without a buffered batch");
        }
        const msg::PrecommitBatch &batch = node.mapped();
        Block block{cluster, seq, w_.now(), {}};
        for (const msg::BatchEntry &e : batch.entries)
        {
            for (const WriteOp &op : e.writes)
            {
                std::int64_t &b = w_.balance(op.account);
                b += op.delta;
                if (b < 0)
                {
                    throw ProtocolViolation("negative balance at shard " + std::to_string(dest.value) + " applying txn " +
                                            std::to_string(e.txn.value));
                }
            }
            block.txns.push_back(e.txn);
        }
        w_.trace.chains[dest.value].push_back(std::move(block));
        D.applied[cluster] = seq;
        const PriorityKey head = batch.entries.empty() ? PriorityKey{} : batch.entries.front().key;
        w_.trace.batch_events.push_back(BatchEvent{w_.now(), dest, BatchEvent::Kind::Apply, cluster, seq, head});
        for (const msg::BatchEntry &e : batch.entries)
        {
            w_.resolve(e.txn);
        }

        std::vector<Deferred> waiting = std::move(D.deferred);
        D.deferred.clear();
        for (Deferred &d : waiting)
        {
            if (satisfied(D, d.req.wait_for))
            {
                respond(dest, d.req);
            }
            else
            {
                D.deferred.push_back(std::move(d));
            }
        }
        schedule_apply(dest, cluster);
    }

    World &w_;
    bool multi_ = false;
    std::vector<Leader> leaders_;
    std::vector<Dest> dests_;
};

} // namespace

std::unique_ptr<Protocol> make_stateful(World &world, const CoverHierarchy *cover) { return std::make_unique<StatefulProtocol>(world, cover); }

} // namespace shardsched::detail

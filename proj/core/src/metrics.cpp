#include "shardsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace shardsched
{

std::ostream &operator<<(std::ostream &os, const Verdict &v)
{
    os << v.name << ": " << (v.passed ? "pass" : "FAIL");
    for (const auto &d : v.details)
    {
        os << "\n  " << d;
    }
    return os;
}

namespace
{

std::string key_text(const PriorityKey &k)
{
    std::ostringstream os;
    os << '(' << k.fields[0] << ',' << k.fields[1] << ',' << k.fields[2] << ',' << k.fields[3] << ",txn " << k.txn.value << ')';
    return os.str();
}

std::vector<Transaction> pending_txns(const RunTrace &trace, Tick t)
{
    std::vector<Transaction> out;
    for (const auto &r : trace.txns)
    {
        if (r.generated <= t && r.finalized > t)
        {
            out.push_back(r.txn);
        }
    }
    return out;
}

} // namespace

PendingSnapshot snapshot_at(const RunTrace &trace, const ShardGraph &g, Tick t)
{
    const std::vector<Transaction> txns = pending_txns(trace, t);
    return make_snapshot(t, txns, g);
}

std::optional<SnapshotRow> snapshot_ratio(const RunTrace &trace, const ShardGraph &g, Tick t, CostModel model)
{
    const PendingSnapshot snap = snapshot_at(trace, g, t);
    if (snap.txns.empty())
    {
        return std::nullopt;
    }
    SnapshotRow row;
    row.t = t;
    row.n_pending = snap.txns.size();
    row.l = snap.l;
    row.d_hat = snap.d_hat;
    row.lb = lower_bound_tau(snap, model);
    row.t_prime = t;
    for (TxnId id : snap.txns)
    {
        row.t_prime = std::max(row.t_prime, trace.txns.at(id.value).finalized);
    }
    row.ratio = row.t_prime == kNever ? INFINITY : static_cast<double>(row.t_prime - t) / static_cast<double>(row.lb);
    return row;
}

std::vector<Tick> snapshot_times(const RunTrace &trace)
{
    std::set<Tick> times;
    const Tick end = trace.end_time;
    const Tick step = std::max<Tick>(1, end / 50);
    for (Tick t = 0; t <= end; t += step)
    {
        times.insert(t);
    }
    for (const auto &r : trace.txns)
    {
        times.insert(r.generated);
    }
    return {times.begin(), times.end()};
}

std::vector<SnapshotRow> snapshot_series(const RunTrace &trace, const ShardGraph &g, CostModel model)
{
    std::vector<SnapshotRow> rows;
    for (Tick t : snapshot_times(trace))
    {
        if (auto row = snapshot_ratio(trace, g, t, model))
        {
            rows.push_back(*row);
        }
    }
    return rows;
}

Verdict verify_safety(const RunTrace &trace, ConflictMode mode)
{
    Verdict v{"safety", true, {}};
    // txn -> shard -> (block, offset)
    std::map<TxnId, std::map<ShardId, std::pair<std::size_t, std::size_t>>> pos;
    for (std::uint32_t s = 0; s < trace.chains.size(); ++s)
    {
        const auto &chain = trace.chains[s];
        for (std::size_t b = 0; b < chain.size(); ++b)
        {
            for (std::size_t i = 0; i < chain[b].txns.size(); ++i)
            {
                const TxnId id = chain[b].txns[i];
                if (!pos[id].emplace(ShardId{s}, std::make_pair(b, i)).second)
                {
                    v.fail("txn " + std::to_string(id.value) + " appears twice on shard " + std::to_string(s));
                }
            }
        }
    }
    std::vector<const TxnRecord *> committed;
    for (const auto &r : trace.txns)
    {
        const bool is_committed = r.committed.value_or(false) && r.is_finalized();
        auto it = pos.find(r.txn.id);
        if (is_committed)
        {
            committed.push_back(&r);
            for (const auto &a : r.txn.accesses)
            {
                if (it == pos.end() || it->second.count(a.shard) == 0)
                {
                    v.fail("committed txn " + std::to_string(r.txn.id.value) + " missing from shard " + std::to_string(a.shard.value));
                }
            }
        }
        else if (it != pos.end() && !(r.committed.value_or(false)))
        {
            v.fail("txn " + std::to_string(r.txn.id.value) + " is on a chain but did not commit");
        }
    }
    for (std::size_t i = 0; i < committed.size(); ++i)
    {
        for (std::size_t j = i + 1; j < committed.size(); ++j)
        {
            const Transaction &a = committed[i]->txn;
            const Transaction &b = committed[j]->txn;
            if (!conflicts(a, b, mode))
            {
                continue;
            }
            const auto &pa = pos[a.id];
            const auto &pb = pos[b.id];
            std::optional<std::pair<ShardId, bool>> first;
            for (const auto &[shard, where] : pa)
            {
                auto other = pb.find(shard);
                if (other == pb.end())
                {
                    continue;
                }
                const bool a_first = where < other->second;
                if (!first)
                {
                    first = std::make_pair(shard, a_first);
                }
                else if (first->second != a_first)
                {
                    v.fail("txns " + std::to_string(a.id.value) + " and " + std::to_string(b.id.value) + ": shard " +
                           std::to_string(first->first.value) + " commits " + std::to_string((first->second ? a : b).id.value) + " first, shard " +
                           std::to_string(shard.value) + " commits " + std::to_string((a_first ? a : b).id.value) + " first");
                }
            }
        }
    }
    return v;
}

Verdict verify_liveness(const RunTrace &trace)
{
    Verdict v{"liveness", true, {}};
    if (!trace.quiescent)
    {
        v.fail("engine stopped at the horizon with events pending");
    }
    for (const auto &r : trace.txns)
    {
        if (!r.is_finalized())
        {
            v.fail("txn " + std::to_string(r.txn.id.value) + " stuck in state " + std::string(to_string(r.txn.status)) + " (resolved at " +
                   std::to_string(r.destinations_resolved) + "/" + std::to_string(r.txn.accesses.size()) + " destinations)");
        }
    }
    return v;
}

Verdict verify_one_live(const RunTrace &trace)
{
    Verdict v{"one-live", true, {}};
    std::map<ShardId, const TxnRecord *> last;
    for (const auto &r : trace.txns) // ids follow generation order
    {
        auto it = last.find(r.txn.home);
        if (it != last.end() && it->second->outcome > r.generated)
        {
            v.fail("home " + std::to_string(r.txn.home.value) + " generated txn " + std::to_string(r.txn.id.value) + " while txn " +
                   std::to_string(it->second->txn.id.value) + " was live");
        }
        last[r.txn.home] = &r;
    }
    return v;
}

Verdict verify_ratio_floor(const std::vector<SnapshotRow> &rows)
{
    Verdict v{"ratio-floor", true, {}};
    for (const auto &r : rows)
    {
        if (r.ratio < 1.0)
        {
            v.fail("snapshot t=" + std::to_string(r.t) + " span " + std::to_string(r.t_prime - r.t) + " below lower bound " + std::to_string(r.lb));
        }
    }
    return v;
}

Verdict verify_cadence(const RunTrace &trace)
{
    Verdict v{"cadence", true, {}};
    std::map<ClusterId, std::vector<const TriggerRecord *>> by_cluster;
    for (const auto &t : trace.triggers)
    {
        by_cluster[t.cluster].push_back(&t);
    }
    std::map<ClusterId, std::vector<Tick>> arrivals;
    for (const auto &r : trace.txns)
    {
        if (r.submitted != kNever)
        {
            arrivals[r.cluster].push_back(r.submitted);
        }
    }
    for (auto &[c, a] : arrivals)
    {
        std::sort(a.begin(), a.end());
    }
    for (const auto &[cluster, trig] : by_cluster)
    {
        const Tick window = 4 * static_cast<Tick>(trace.lambda.at(cluster));
        const auto &arr = arrivals[cluster];
        for (std::size_t i = 0; i + 1 < trig.size(); ++i)
        {
            const Tick t0 = trig[i]->time;
            const Tick t1 = trig[i + 1]->time;
            Tick limit = t0 + window;
            if (trig[i]->empty)
            {
                auto next = std::lower_bound(arr.begin(), arr.end(), t0);
                if (next != arr.end())
                {
                    limit = std::max(limit, *next);
                }
            }
            if (t1 > limit)
            {
                v.fail("cluster " + std::to_string(cluster.value) + ": triggers at " + std::to_string(t0) + " and " + std::to_string(t1) +
                       " exceed 4*lambda=" + std::to_string(window));
            }
        }
    }
    for (const auto &r : trace.rounds)
    {
        if (r.colors > r.lambda)
        {
            v.fail("cluster " + std::to_string(r.cluster.value) + " round at " + std::to_string(r.trigger_time) + " processed " +
                   std::to_string(r.colors) + " colors with lambda=" + std::to_string(r.lambda));
        }
    }
    return v;
}

Verdict verify_destination_order(const RunTrace &trace)
{
    Verdict v{"destination-order", true, {}};
    if (!trace.stateful)
    {
        std::map<ShardId, std::set<PriorityKey>> queues;
        for (const auto &e : trace.queue_events)
        {
            auto &q = queues[e.dest];
            switch (e.kind)
            {
            case QueueEvent::Kind::Arrive:
                q.insert(e.key);
                break;
            case QueueEvent::Kind::Remove:
                q.erase(e.key);
                break;
            case QueueEvent::Kind::Take:
                if (q.empty() || *q.begin() != e.key)
                {
                    v.fail("shard " + std::to_string(e.dest.value) + " at t=" + std::to_string(e.time) + " took " + key_text(e.key) +
                           (q.empty() ? std::string(" from an empty queue") : " while " + key_text(*q.begin()) + " was queued"));
                }
                q.erase(e.key);
                break;
            }
        }
        return v;
    }
    std::map<ShardId, std::map<ClusterId, std::set<std::uint64_t>>> buffered;
    std::map<std::pair<ShardId, ClusterId>, std::uint64_t> applied;
    for (const auto &e : trace.batch_events)
    {
        auto &buf = buffered[e.dest];
        if (e.kind == BatchEvent::Kind::Arrive)
        {
            for (const auto &[c, seqs] : buf)
            {
                if (c != e.cluster && !seqs.empty())
                {
                    v.fail("shard " + std::to_string(e.dest.value) + " at t=" + std::to_string(e.time) + " buffers batches of clusters " +
                           std::to_string(c.value) + " and " + std::to_string(e.cluster.value) + " together");
                }
            }
            buf[e.cluster].insert(e.seq);
            continue;
        }
        std::uint64_t &last = applied[{e.dest, e.cluster}];
        auto &seqs = buf[e.cluster];
        if (e.seq != last + 1 || seqs.empty() || *seqs.begin() != e.seq)
        {
            v.fail("shard " + std::to_string(e.dest.value) + " applied batch " + std::to_string(e.seq) + " of cluster " +
                   std::to_string(e.cluster.value) + " after " + std::to_string(last));
        }
        last = e.seq;
        seqs.erase(e.seq);
    }
    return v;
}

Verdict verify_single_holder(const RunTrace &trace, const CoverHierarchy &cover)
{
    Verdict v{"single-holder", true, {}};
    const auto &cs = cover.clusters();
    auto overlap = [&](ClusterId a, ClusterId b) {
        const auto &ma = cs.at(a.value).members;
        const auto &mb = cs.at(b.value).members;
        std::vector<ShardId> common;
        std::set_intersection(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(common));
        return !common.empty();
    };
    std::set<ClusterId> holders;
    for (const auto &rec : trace.control)
    {
        if (!rec.holding)
        {
            holders.erase(rec.cluster);
            continue;
        }
        for (ClusterId h : holders)
        {
            if (h != rec.cluster && overlap(h, rec.cluster))
            {
                v.fail("t=" + std::to_string(rec.time) + ": clusters " + std::to_string(h.value) + " and " + std::to_string(rec.cluster.value) +
                       " both hold control");
            }
        }
        holders.insert(rec.cluster);
    }
    return v;
}

Verdict verify_makespan_bound(const RunTrace &trace, const ShardGraph &g, std::uint32_t k, Length d)
{
    Verdict v{"makespan-bound", true, {}};
    for (Tick t : snapshot_times(trace))
    {
        const PendingSnapshot snap = snapshot_at(trace, g, t);
        if (snap.txns.empty())
        {
            continue;
        }
        const Tick bound = t + (static_cast<Tick>(k) * snap.l + 1) * 3 * d + 4 * d;
        for (TxnId id : snap.txns)
        {
            const Tick f = trace.txns.at(id.value).finalized;
            if (f > bound)
            {
                v.fail("snapshot t=" + std::to_string(t) + " l=" + std::to_string(snap.l) + ": txn " + std::to_string(id.value) + " finalized at " +
                       (f == kNever ? std::string("never") : std::to_string(f)) + ", bound " + std::to_string(bound));
            }
        }
    }
    return v;
}

RunStats summarize(const RunTrace &trace, const std::vector<SnapshotRow> &rows)
{
    RunStats s;
    std::vector<Tick> lat;
    Tick first = kNever;
    Tick last = 0;
    for (const auto &r : trace.txns)
    {
        ++s.generated;
        first = std::min(first, r.generated);
        if (!r.is_finalized())
        {
            ++s.unfinished;
            continue;
        }
        (r.committed.value_or(false) ? s.committed : s.aborted) += 1;
        lat.push_back(r.finalized - r.generated);
        last = std::max(last, r.finalized);
    }
    if (!lat.empty())
    {
        std::sort(lat.begin(), lat.end());
        double sum = 0;
        for (Tick x : lat)
        {
            sum += static_cast<double>(x);
        }
        s.mean_latency = sum / static_cast<double>(lat.size());
        const std::size_t n = lat.size();
        s.median_latency = n % 2 ? static_cast<double>(lat[n / 2]) : (static_cast<double>(lat[n / 2 - 1]) + static_cast<double>(lat[n / 2])) / 2.0;
        s.p99_latency = static_cast<double>(lat[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1)]);
        s.makespan = last - first;
        s.throughput = s.makespan > 0 ? static_cast<double>(n) / static_cast<double>(s.makespan) : 0.0;
    }
    for (const auto &r : rows)
    {
        s.max_ratio = std::max(s.max_ratio, r.ratio);
    }
    return s;
}

void write_txn_csv(std::ostream &os, const RunTrace &trace, const ShardGraph &g)
{
    os << kTxnCsvHeader << '\n';
    auto tick = [](Tick t) { return t == kNever ? std::string("-1") : std::to_string(t); };
    for (const auto &r : trace.txns)
    {
        Length max_dist = 0;
        for (const auto &a : r.txn.accesses)
        {
            max_dist = std::max(max_dist, g.distance(r.txn.home, a.shard));
        }
        const char *outcome = !r.is_finalized() ? "pending" : (r.committed.value_or(false) ? "committed" : "aborted");
        os << r.txn.id.value << ',' << r.txn.home.value << ',' << r.txn.ts << ',' << tick(r.scheduled) << ',' << tick(r.finalized) << ',' << outcome
           << ',' << r.txn.accesses.size() << ',' << max_dist << '\n';
    }
}

void write_snapshot_csv(std::ostream &os, const std::vector<SnapshotRow> &rows)
{
    os << kSnapshotCsvHeader << '\n';
    for (const auto &r : rows)
    {
        os << r.t << ',' << r.n_pending << ',' << r.l << ',' << r.d_hat << ',' << (r.t_prime == kNever ? -1 : r.t_prime) << ',' << r.lb << ','
           << std::fixed << std::setprecision(4) << r.ratio << std::defaultfloat << '\n';
    }
}

} // namespace shardsched

#include "shardsched/workload.hpp"

#include "shardsched/trace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace shardsched
{

std::vector<std::vector<std::uint32_t>> SimpleGraph::adjacency() const
{
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto [u, v] : edges)
    {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto &a : adj)
    {
        std::sort(a.begin(), a.end());
    }
    return adj;
}

RandomWorkload::RandomWorkload(const ShardGraph &g, WorkloadSpec spec)
    : graph_(g), spec_(spec), rng_(derive_seed(spec.seed, 0x3017))
{
    if (spec_.k_max < 1)
    {
        throw ConfigError("workload: k_max must be at least 1");
    }
    if (spec_.d_max < 0)
    {
        spec_.d_max = g.diameter();
    }
    if (spec_.d_max > g.diameter())
    {
        throw ConfigError("workload: d_max exceeds the graph diameter");
    }
    if (spec_.write_prob < 0.0 || spec_.write_prob > 1.0)
    {
        throw ConfigError("workload: write_prob must lie in [0, 1]");
    }
    if (spec_.accounts_per_shard < 1 || spec_.max_amount < 1 || spec_.initial_balance < 0)
    {
        throw ConfigError("workload: accounts_per_shard and max_amount must be positive, initial_balance non-negative");
    }
    if (spec_.skew == Skew::Zipf && spec_.zipf_alpha <= 0.0)
    {
        throw ConfigError("workload: zipf_alpha must be positive");
    }
    accounts_ = AccountUniverse{g.size(), spec_.accounts_per_shard, spec_.initial_balance};
}

std::vector<std::pair<ShardId, Tick>> RandomWorkload::initial()
{
    std::vector<std::pair<ShardId, Tick>> out;
    for (std::uint32_t s = 0; s < graph_.size(); ++s)
    {
        out.emplace_back(ShardId{s}, 0);
    }
    return out;
}

std::optional<Transaction> RandomWorkload::generate(ShardId home, Tick now, TxnId id)
{
    if (generated_ >= spec_.txn_count || now > spec_.horizon)
    {
        return std::nullopt;
    }
    ++generated_;
    return next_txn(home, now, id);
}

std::optional<Tick> RandomWorkload::next_release(ShardId, Tick now)
{
    if (generated_ >= spec_.txn_count || now > spec_.horizon)
    {
        return std::nullopt;
    }
    return now;
}

std::vector<ShardId> RandomWorkload::pick_destinations(ShardId home)
{
    std::vector<ShardId> pool = graph_.z_neighborhood(home, spec_.d_max);
    const auto want = static_cast<std::size_t>(rng_.between(1, spec_.k_max));
    const std::size_t count = std::min(want, pool.size());

    std::vector<ShardId> out;
    if (spec_.skew == Skew::Uniform)
    {
        // partial Fisher-Yates
        for (std::size_t i = 0; i < count; ++i)
        {
            const std::size_t j = i + rng_.below(pool.size() - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
    }
    else
    {
        std::vector<double> w(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i)
        {
            w[i] = 1.0 / std::pow(static_cast<double>(pool[i].value) + 1.0, spec_.zipf_alpha);
        }
        for (std::size_t n = 0; n < count; ++n)
        {
            double total = 0.0;
            for (double x : w)
            {
                total += x;
            }
            double r = rng_.unit() * total;
            std::size_t pick = 0;
            for (; pick + 1 < w.size(); ++pick)
            {
                if (w[pick] > 0.0 && r < w[pick])
                {
                    break;
                }
                r -= w[pick];
            }
            while (w[pick] == 0.0) // rounding can land on a used slot at the tail
            {
                --pick;
            }
            out.push_back(pool[pick]);
            w[pick] = 0.0;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Transaction RandomWorkload::next_txn(ShardId home, Tick now, TxnId id)
{
    Transaction t;
    t.id = id;
    t.ts = now;
    t.home = home;

    const std::vector<ShardId> dests = pick_destinations(home);
    std::vector<std::size_t> writers;
    for (std::size_t i = 0; i < dests.size(); ++i)
    {
        t.accesses.push_back(ShardAccess{dests[i], {}, {}});
        if (rng_.unit() < spec_.write_prob)
        {
            writers.push_back(i);
        }
    }
    const std::uint32_t per = accounts_.per_shard;
    auto any_account = [&](ShardId s) { return accounts_.account(s, static_cast<std::uint32_t>(rng_.below(per))); };
    const std::int64_t amount = rng_.between(1, spec_.max_amount);

    if (writers.size() == 1)
    {
        ShardAccess &acc = t.accesses[writers[0]];
        const auto from = static_cast<std::uint32_t>(rng_.below(per));
        std::uint32_t to = from;
        if (per > 1)
        {
            to = static_cast<std::uint32_t>(rng_.below(per - 1));
            if (to >= from)
            {
                ++to;
            }
        }
        acc.writes.push_back(WriteOp{accounts_.account(acc.shard, from), -amount, true});
        acc.writes.push_back(WriteOp{accounts_.account(acc.shard, to), amount, false});
    }
    else if (writers.size() > 1)
    {
        const std::size_t src = rng_.below(writers.size());
        const auto others = static_cast<std::int64_t>(writers.size() - 1);
        for (std::size_t i = 0; i < writers.size(); ++i)
        {
            ShardAccess &acc = t.accesses[writers[i]];
            if (i == src)
            {
                acc.writes.push_back(WriteOp{any_account(acc.shard), -amount * others, true});
            }
            else
            {
                acc.writes.push_back(WriteOp{any_account(acc.shard), amount, false});
            }
        }
    }
    for (auto &acc : t.accesses)
    {
        if (!acc.writes_any())
        {
            acc.reads.push_back(any_account(acc.shard));
        }
    }
    return t;
}

ScriptedWorkload::ScriptedWorkload(std::uint32_t shards, std::vector<ScriptedTxn> txns, AccountUniverse accounts)
    : accounts_(accounts), queues_(shards)
{
    std::stable_sort(txns.begin(), txns.end(), [](const ScriptedTxn &a, const ScriptedTxn &b) { return a.release < b.release; });
    for (auto &t : txns)
    {
        if (t.home.value >= shards)
        {
            throw ConfigError("scripted workload: home shard out of range");
        }
        if (t.accesses.empty())
        {
            throw ConfigError("scripted workload: transaction without accesses");
        }
        std::sort(t.accesses.begin(), t.accesses.end(), [](const ShardAccess &a, const ShardAccess &b) { return a.shard < b.shard; });
        queues_[t.home.value].push_back(std::move(t));
    }
}

std::vector<std::pair<ShardId, Tick>> ScriptedWorkload::initial()
{
    std::vector<std::pair<ShardId, Tick>> out;
    for (std::uint32_t s = 0; s < queues_.size(); ++s)
    {
        if (!queues_[s].empty())
        {
            out.emplace_back(ShardId{s}, queues_[s].front().release);
        }
    }
    return out;
}

std::optional<Transaction> ScriptedWorkload::generate(ShardId home, Tick now, TxnId id)
{
    auto &q = queues_.at(home.value);
    if (q.empty())
    {
        return std::nullopt;
    }
    Transaction t;
    t.id = id;
    t.ts = now;
    t.home = home;
    t.accesses = std::move(q.front().accesses);
    q.pop_front();
    return t;
}

std::optional<Tick> ScriptedWorkload::next_release(ShardId home, Tick now)
{
    const auto &q = queues_.at(home.value);
    if (q.empty())
    {
        return std::nullopt;
    }
    return std::max(now, q.front().release);
}

Length measured_d(const RunTrace &trace, const ShardGraph &g)
{
    Length d = 0;
    for (const auto &r : trace.txns)
    {
        for (const auto &a : r.txn.accesses)
        {
            d = std::max(d, g.distance(r.txn.home, a.shard));
        }
    }
    return d;
}

SimpleGraph read_edge_list(std::istream &in)
{
    SimpleGraph h;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#')
        {
            continue;
        }
        long long u = 0;
        long long v = 0;
        std::istringstream fs(first);
        std::string rest;
        if (!(fs >> u) || !(ls >> v) || (ls >> rest) || u < 0 || v < 0)
        {
            throw ConfigError("edge list line " + std::to_string(lineno) + ": expected two non-negative vertex ids");
        }
        if (u == v)
        {
            throw ConfigError("edge list line " + std::to_string(lineno) + ": self-loop");
        }
        const auto a = static_cast<std::uint32_t>(u);
        const auto b = static_cast<std::uint32_t>(v);
        const std::pair<std::uint32_t, std::uint32_t> e = std::minmax(a, b);
        if (!seen.insert(e).second)
        {
            throw ConfigError("edge list line " + std::to_string(lineno) + ": repeated edge");
        }
        h.edges.emplace_back(e.first, e.second);
        h.n = std::max(h.n, e.second + 1);
    }
    return h;
}

ReductionInstance reduction_instance(const SimpleGraph &h)
{
    if (h.edges.empty())
    {
        throw UsageError("reduction_instance: graph has no edges");
    }
    std::vector<std::vector<std::uint32_t>> incident(h.n); // vertex -> edge shards
    for (std::uint32_t e = 0; e < h.edges.size(); ++e)
    {
        auto [u, v] = h.edges[e];
        if (u >= h.n || v >= h.n || u == v)
        {
            throw UsageError("reduction_instance: malformed edge");
        }
        incident[u].push_back(e);
        incident[v].push_back(e);
    }
    std::vector<std::uint32_t> isolated;
    for (std::uint32_t v = 0; v < h.n; ++v)
    {
        if (incident[v].empty())
        {
            isolated.push_back(v);
        }
    }
    const auto shards = static_cast<std::uint32_t>(h.edges.size() + isolated.size());
    ShardGraph g = build_graph(topology::Clique{shards, 1});
    AccountUniverse accounts{shards, 1, 1};

    std::vector<Transaction> txns;
    std::size_t next_private = h.edges.size();
    for (std::uint32_t v = 0; v < h.n; ++v)
    {
        Transaction t;
        t.id = TxnId{v};
        t.ts = 0;
        if (incident[v].empty())
        {
            const ShardId s{static_cast<std::uint32_t>(next_private++)};
            t.home = s;
            t.accesses.push_back(ShardAccess{s, {}, {WriteOp{accounts.account(s, 0), 0, false}}});
        }
        else
        {
            t.home = ShardId{incident[v].front()};
            for (std::uint32_t e : incident[v])
            {
                const ShardId s{e};
                t.accesses.push_back(ShardAccess{s, {}, {WriteOp{accounts.account(s, 0), 0, false}}});
            }
        }
        txns.push_back(std::move(t));
    }
    return ReductionInstance{std::move(g), std::move(txns), accounts, std::move(isolated)};
}

ScriptedWorkload reduction_workload(const ReductionInstance &inst)
{
    std::vector<ScriptedTxn> script;
    for (const auto &t : inst.txns)
    {
        script.push_back(ScriptedTxn{t.home, 0, t.accesses});
    }
    return ScriptedWorkload(inst.graph.size(), std::move(script), inst.accounts);
}

} // namespace shardsched

#include "shardsched/oracle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace shardsched
{

Adjacency adjacency_of(const ConflictGraph &g)
{
    const std::vector<TxnId> ids = g.vertices();
    std::map<TxnId, std::uint32_t> index;
    for (std::uint32_t i = 0; i < ids.size(); ++i)
    {
        index[ids[i]] = i;
    }
    Adjacency adj(ids.size());
    for (std::uint32_t i = 0; i < ids.size(); ++i)
    {
        for (TxnId nb : g.neighbors(ids[i]))
        {
            adj[i].push_back(index.at(nb));
        }
        std::sort(adj[i].begin(), adj[i].end());
    }
    return adj;
}

namespace
{

class Dsatur
{
public:
    explicit Dsatur(const Adjacency &adj) : adj_(adj), n_(adj.size()), color_(n_, -1) {}

    std::uint32_t solve()
    {
        if (n_ == 0)
        {
            return 0;
        }
        best_ = heuristic();
        std::fill(color_.begin(), color_.end(), -1);
        search(0, 0);
        return best_;
    }

private:
    std::size_t saturation(std::size_t v) const
    {
        std::uint64_t seen = 0;
        for (auto u : adj_[v])
        {
            if (color_[u] >= 0)
            {
                seen |= 1ULL << color_[u];
            }
        }
        return static_cast<std::size_t>(__builtin_popcountll(seen));
    }

    std::size_t pick() const
    {
        std::size_t best = n_;
        std::size_t best_sat = 0;
        for (std::size_t v = 0; v < n_; ++v)
        {
            if (color_[v] >= 0)
            {
                continue;
            }
            const std::size_t sat = saturation(v);
            if (best == n_ || sat > best_sat || (sat == best_sat && adj_[v].size() > adj_[best].size()))
            {
                best = v;
                best_sat = sat;
            }
        }
        return best;
    }

    bool allowed(std::size_t v, int c) const
    {
        return std::none_of(adj_[v].begin(), adj_[v].end(), [&](std::uint32_t u) { return color_[u] == c; });
    }

    std::uint32_t heuristic()
    {
        std::uint32_t used = 0;
        for (std::size_t step = 0; step < n_; ++step)
        {
            const std::size_t v = pick();
            int c = 0;
            while (!allowed(v, c))
            {
                ++c;
            }
            color_[v] = c;
            used = std::max(used, static_cast<std::uint32_t>(c + 1));
        }
        return used;
    }

    void search(std::size_t colored, std::uint32_t used)
    {
        if (used >= best_)
        {
            return;
        }
        if (colored == n_)
        {
            best_ = used;
            return;
        }
        const std::size_t v = pick();
        for (std::uint32_t c = 0; c <= used && c + 1 < best_; ++c)
        {
            if (!allowed(v, static_cast<int>(c)))
            {
                continue;
            }
            color_[v] = static_cast<int>(c);
            search(colored + 1, std::max(used, c + 1));
            color_[v] = -1;
        }
    }

    const Adjacency &adj_;
    std::size_t n_;
    std::vector<int> color_;
    std::uint32_t best_ = 0;
};

} // namespace

std::uint32_t chromatic_number(const Adjacency &adj, std::size_t budget)
{
    if (adj.size() > budget)
    {
        throw UsageError("chromatic_number: " + std::to_string(adj.size()) + " vertices exceed the oracle budget of " + std::to_string(budget));
    }
    return Dsatur(adj).solve();
}

std::uint32_t chromatic_number(const ConflictGraph &g, std::size_t budget) { return chromatic_number(adjacency_of(g), budget); }

std::uint32_t greedy_colors(const Adjacency &adj, std::span<const std::uint32_t> order)
{
    std::vector<int> color(adj.size(), -1);
    std::uint32_t used = 0;
    for (std::uint32_t v : order)
    {
        std::vector<bool> taken(adj.size() + 1, false);
        for (std::uint32_t u : adj.at(v))
        {
            if (color[u] >= 0)
            {
                taken[static_cast<std::size_t>(color[u])] = true;
            }
        }
        int c = 0;
        while (taken[static_cast<std::size_t>(c)])
        {
            ++c;
        }
        color[v] = c;
        used = std::max(used, static_cast<std::uint32_t>(c + 1));
    }
    return used;
}

std::uint32_t max_degree(const Adjacency &adj)
{
    std::size_t d = 0;
    for (const auto &a : adj)
    {
        d = std::max(d, a.size());
    }
    return static_cast<std::uint32_t>(d);
}

GreedyComparison greedy_vs_optimal(const Adjacency &adj, std::span<const std::uint32_t> order, std::size_t budget)
{
    GreedyComparison r;
    r.optimal = chromatic_number(adj, budget);
    r.greedy = greedy_colors(adj, order);
    r.max_degree = max_degree(adj);
    if (r.optimal > r.greedy || (!adj.empty() && r.greedy > r.max_degree + 1))
    {
        throw std::logic_error("greedy/optimal sandwich violated: chi=" + std::to_string(r.optimal) + " greedy=" + std::to_string(r.greedy) +
                               " maxdeg=" + std::to_string(r.max_degree));
    }
    return r;
}

GreedyComparison greedy_vs_optimal(const ConflictGraph &g, std::span<const TxnId> order, std::size_t budget)
{
    const std::vector<TxnId> ids = g.vertices();
    std::vector<std::uint32_t> idx;
    for (TxnId t : order)
    {
        auto it = std::lower_bound(ids.begin(), ids.end(), t);
        if (it == ids.end() || *it != t)
        {
            throw UsageError("greedy_vs_optimal: order names a transaction outside the graph");
        }
        idx.push_back(static_cast<std::uint32_t>(it - ids.begin()));
    }
    return greedy_vs_optimal(adjacency_of(g), idx, budget);
}

SimpleGraph crown_graph(std::uint32_t n)
{
    SimpleGraph h;
    h.n = 2 * n;
    for (std::uint32_t i = 0; i < n; ++i)
    {
        for (std::uint32_t j = 0; j < n; ++j)
        {
            if (i != j)
            {
                h.edges.emplace_back(i, n + j);
            }
        }
    }
    return h;
}

PendingSnapshot make_snapshot(Tick t, std::span<const Transaction> txns, const ShardGraph &g)
{
    PendingSnapshot s;
    s.t = t;
    s.loads.assign(g.size(), 0);
    for (const Transaction &tx : txns)
    {
        s.txns.push_back(tx.id);
        for (const auto &a : tx.accesses)
        {
            s.l = std::max(s.l, ++s.loads.at(a.shard.value));
            s.d_hat = std::max(s.d_hat, g.distance(tx.home, a.shard));
        }
    }
    return s;
}

std::int64_t lower_bound_tau(const PendingSnapshot &snap, CostModel model)
{
    if (snap.txns.empty())
    {
        throw UsageError("lower_bound_tau: empty snapshot");
    }
    const std::int64_t l = snap.l;
    return model == CostModel::Stateless ? l : std::max<std::int64_t>(l, snap.d_hat);
}

} // namespace shardsched

#include "shardsched/shard_graph.hpp"

#include "shardsched/rng.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <utility>

namespace shardsched
{

namespace
{

constexpr Length kInf = std::numeric_limits<Length>::max() / 4;

void require_positive(std::uint64_t value, const char *what)
{
    if (value == 0)
    {
        throw ConfigError(std::string("topology: ") + what + " must be positive");
    }
}

void require_positive_weight(Length w)
{
    if (w <= 0)
    {
        throw ConfigError("topology: edge weight must be positive, got " + std::to_string(w));
    }
}

std::vector<std::vector<Length>> empty_matrix(std::uint32_t n)
{
    std::vector<std::vector<Length>> m(n, std::vector<Length>(n, ShardGraph::kNoEdge));
    for (std::uint32_t i = 0; i < n; ++i)
    {
        m[i][i] = 0;
    }
    return m;
}

struct Builder
{
    std::vector<std::vector<Length>> operator()(const topology::Clique &c) const
    {
        require_positive(c.shards, "shard count");
        require_positive_weight(c.weight);
        auto m = empty_matrix(c.shards);
        for (std::uint32_t i = 0; i < c.shards; ++i)
        {
            for (std::uint32_t j = 0; j < c.shards; ++j)
            {
                if (i != j)
                {
                    m[i][j] = c.weight;
                }
            }
        }
        return m;
    }

    std::vector<std::vector<Length>> operator()(const topology::Line &l) const
    {
        require_positive(l.shards, "shard count");
        require_positive_weight(l.weight);
        auto m = empty_matrix(l.shards);
        for (std::uint32_t i = 0; i + 1 < l.shards; ++i)
        {
            m[i][i + 1] = m[i + 1][i] = l.weight;
        }
        return m;
    }

    std::vector<std::vector<Length>> operator()(const topology::Grid &g) const
    {
        require_positive(g.rows, "grid rows");
        require_positive(g.cols, "grid cols");
        require_positive_weight(g.weight);
        const std::uint32_t n = g.rows * g.cols;
        auto m = empty_matrix(n);
        for (std::uint32_t r = 0; r < g.rows; ++r)
        {
            for (std::uint32_t c = 0; c < g.cols; ++c)
            {
                const std::uint32_t v = r * g.cols + c;
                if (c + 1 < g.cols)
                {
                    m[v][v + 1] = m[v + 1][v] = g.weight;
                }
                if (r + 1 < g.rows)
                {
                    m[v][v + g.cols] = m[v + g.cols][v] = g.weight;
                }
            }
        }
        return m;
    }

    std::vector<std::vector<Length>> operator()(const topology::RandomMetric &r) const
    {
        require_positive(r.shards, "shard count");
        // Side chosen so the expected diameter grows like sqrt(s) while
        // leaving room for s distinct points.
        std::uint32_t side = 2;
        while (side * side < 2 * r.shards)
        {
            ++side;
        }
        Rng rng(r.seed);
        std::set<std::pair<std::int64_t, std::int64_t>> used;
        std::vector<std::pair<std::int64_t, std::int64_t>> pts;
        pts.reserve(r.shards);
        while (pts.size() < r.shards)
        {
            std::pair<std::int64_t, std::int64_t> p{static_cast<std::int64_t>(rng.below(side)), static_cast<std::int64_t>(rng.below(side))};
            if (used.insert(p).second)
            {
                pts.push_back(p);
            }
        }
        auto m = empty_matrix(r.shards);
        for (std::uint32_t i = 0; i < r.shards; ++i)
        {
            for (std::uint32_t j = 0; j < r.shards; ++j)
            {
                if (i != j)
                {
                    m[i][j] = std::abs(pts[i].first - pts[j].first) + std::abs(pts[i].second - pts[j].second);
                }
            }
        }
        return m;
    }
};

struct Describer
{
    std::string operator()(const topology::Clique &c) const
    {
        return "clique(" + std::to_string(c.shards) + ", w=" + std::to_string(c.weight) + ")";
    }
    std::string operator()(const topology::Line &l) const
    {
        return "line(" + std::to_string(l.shards) + ", w=" + std::to_string(l.weight) + ")";
    }
    std::string operator()(const topology::Grid &g) const
    {
        return "grid(" + std::to_string(g.rows) + "x" + std::to_string(g.cols) + ", w=" + std::to_string(g.weight) + ")";
    }
    std::string operator()(const topology::RandomMetric &r) const
    {
        return "random-metric(" + std::to_string(r.shards) + ", seed=" + std::to_string(r.seed) + ")";
    }
};

} // namespace

std::string describe(const TopologySpec &spec) { return std::visit(Describer{}, spec); }

ShardGraph ShardGraph::from_weights(std::vector<std::vector<Length>> weights)
{
    const auto n = static_cast<std::uint32_t>(weights.size());
    if (n == 0)
    {
        throw ConfigError("topology: shard count must be positive");
    }
    for (std::uint32_t i = 0; i < n; ++i)
    {
        if (weights[i].size() != n)
        {
            throw ConfigError("topology: weight matrix is not square");
        }
        if (weights[i][i] != 0 && weights[i][i] != kNoEdge)
        {
            throw ConfigError("topology: self distance must be zero");
        }
        for (std::uint32_t j = 0; j < n; ++j)
        {
            if (weights[i][j] != weights[j][i])
            {
                throw ConfigError("topology: weight matrix is not symmetric");
            }
            if (i != j && weights[i][j] != kNoEdge && weights[i][j] <= 0)
            {
                throw ConfigError("topology: edge weight must be positive");
            }
        }
    }

    ShardGraph g;
    g.n_ = n;
    g.dist_.assign(static_cast<std::size_t>(n) * n, kInf);
    for (std::uint32_t i = 0; i < n; ++i)
    {
        for (std::uint32_t j = 0; j < n; ++j)
        {
            if (i == j)
            {
                g.dist_[i * n + j] = 0;
            }
            else if (weights[i][j] != kNoEdge)
            {
                g.dist_[i * n + j] = weights[i][j];
            }
        }
    }
    // Floyd-Warshall metric closure.
    for (std::uint32_t k = 0; k < n; ++k)
    {
        for (std::uint32_t i = 0; i < n; ++i)
        {
            const Length ik = g.dist_[i * n + k];
            if (ik >= kInf)
            {
                continue;
            }
            for (std::uint32_t j = 0; j < n; ++j)
            {
                const Length cand = ik + g.dist_[k * n + j];
                if (cand < g.dist_[i * n + j])
                {
                    g.dist_[i * n + j] = cand;
                }
            }
        }
    }
    for (Length d : g.dist_)
    {
        if (d >= kInf)
        {
            throw ConfigError("topology: shard graph is disconnected");
        }
        g.diameter_ = std::max(g.diameter_, d);
    }
    return g;
}

Length ShardGraph::distance(ShardId i, ShardId j) const
{
    if (!contains(i) || !contains(j))
    {
        throw UsageError("distance: shard index out of range");
    }
    return dist_[static_cast<std::size_t>(i.value) * n_ + j.value];
}

std::vector<ShardId> ShardGraph::z_neighborhood(ShardId i, Length z) const
{
    if (!contains(i))
    {
        throw UsageError("z_neighborhood: shard index out of range");
    }
    if (z < 0)
    {
        throw UsageError("z_neighborhood: negative radius");
    }
    std::vector<ShardId> out;
    for (std::uint32_t j = 0; j < n_; ++j)
    {
        if (dist_[static_cast<std::size_t>(i.value) * n_ + j] <= z)
        {
            out.emplace_back(j);
        }
    }
    return out;
}

ShardGraph build_graph(const TopologySpec &spec) { return ShardGraph::from_weights(std::visit(Builder{}, spec)); }

} // namespace shardsched

#include "shardsched/conflict_graph.hpp"

#include <algorithm>
#include <utility>

namespace shardsched
{

namespace
{

bool account_overlap(const ShardAccess &a, const ShardAccess &b)
{
    auto writes = [](const ShardAccess &x, AccountId acc) {
        return std::any_of(x.writes.begin(), x.writes.end(), [acc](const WriteOp &w) { return w.account == acc; });
    };
    auto touches = [&](const ShardAccess &x, AccountId acc) {
        return writes(x, acc) || std::find(x.reads.begin(), x.reads.end(), acc) != x.reads.end();
    };
    for (const WriteOp &w : a.writes)
    {
        if (touches(b, w.account))
        {
            return true;
        }
    }
    for (const WriteOp &w : b.writes)
    {
        if (touches(a, w.account))
        {
            return true;
        }
    }
    return false;
}

} // namespace

bool conflicts(const Transaction &a, const Transaction &b, ConflictMode mode)
{
    // Both access lists are sorted by shard.
    auto i = a.accesses.begin();
    auto j = b.accesses.begin();
    while (i != a.accesses.end() && j != b.accesses.end())
    {
        if (i->shard < j->shard)
        {
            ++i;
        }
        else if (j->shard < i->shard)
        {
            ++j;
        }
        else
        {
            const bool hit = mode == ConflictMode::Shard ? (i->writes_any() || j->writes_any()) : account_overlap(*i, *j);
            if (hit)
            {
                return true;
            }
            ++i;
            ++j;
        }
    }
    return false;
}

const ConflictGraph::Vertex &ConflictGraph::vertex(TxnId t) const
{
    auto it = vertices_.find(t);
    if (it == vertices_.end())
    {
        throw UsageError("conflict graph: unknown transaction " + std::to_string(t.value));
    }
    return it->second;
}

ConflictGraph::Vertex &ConflictGraph::vertex(TxnId t) { return const_cast<Vertex &>(std::as_const(*this).vertex(t)); }

void ConflictGraph::extend(const Transaction &t)
{
    if (!seen_.insert(t.id).second)
    {
        throw UsageError("extend: transaction id " + std::to_string(t.id.value) + " already used");
    }
    Vertex v{t, {}, std::nullopt};
    for (auto &[id, other] : vertices_)
    {
        if (conflicts(t, other.txn, mode_))
        {
            v.adj.insert(id);
            other.adj.insert(t.id);
            ++edges_;
        }
    }
    vertices_.emplace(t.id, std::move(v));
}

Color ConflictGraph::color_floor() const
{
    if (colored_.empty())
    {
        return floor_;
    }
    return std::max(floor_, *colored_.begin());
}

void ConflictGraph::raise_floor() { floor_ = color_floor(); }

Color ConflictGraph::greedy_color(TxnId t, Color floor)
{
    Vertex &v = vertex(t);
    if (v.color)
    {
        throw UsageError("greedy_color: transaction " + std::to_string(t.value) + " is already colored");
    }
    std::vector<Color> used;
    used.reserve(v.adj.size());
    for (TxnId n : v.adj)
    {
        const auto &c = vertices_.at(n).color;
        if (c && *c >= floor)
        {
            used.push_back(*c);
        }
    }
    std::sort(used.begin(), used.end());
    Color c = floor;
    for (Color u : used)
    {
        if (u == c)
        {
            ++c;
        }
        else if (u > c)
        {
            break;
        }
    }
    v.color = c;
    colored_.insert(c);
    return c;
}

void ConflictGraph::cancel_color(TxnId t)
{
    Vertex &v = vertex(t);
    if (!v.color)
    {
        throw UsageError("cancel_color: transaction " + std::to_string(t.value) + " is not colored");
    }
    if (is_final(v.txn.status))
    {
        throw UsageError("cancel_color: transaction " + std::to_string(t.value) + " is finalized");
    }
    raise_floor();
    colored_.erase(colored_.find(*v.color));
    v.color.reset();
    v.txn.status = TxnStatus::Pending;
}

void ConflictGraph::remove(const Transaction &t)
{
    if (!is_final(t.status))
    {
        throw UsageError("remove: transaction " + std::to_string(t.id.value) + " is not finalized");
    }
    Vertex &v = vertex(t.id);
    raise_floor();
    if (v.color)
    {
        colored_.erase(colored_.find(*v.color));
    }
    for (TxnId n : v.adj)
    {
        vertices_.at(n).adj.erase(t.id);
        --edges_;
    }
    vertices_.erase(t.id);
    raise_floor();
}

void ConflictGraph::set_status(TxnId t, TxnStatus s) { vertex(t).txn.status = s; }

std::optional<Color> ConflictGraph::color(TxnId t) const { return vertex(t).color; }

std::size_t ConflictGraph::degree(TxnId t) const { return vertex(t).adj.size(); }

const std::set<TxnId> &ConflictGraph::neighbors(TxnId t) const { return vertex(t).adj; }

const Transaction &ConflictGraph::transaction(TxnId t) const { return vertex(t).txn; }

std::vector<TxnId> ConflictGraph::vertices() const
{
    std::vector<TxnId> out;
    out.reserve(vertices_.size());
    for (const auto &[id, v] : vertices_)
    {
        out.push_back(id);
    }
    return out;
}

std::vector<std::pair<Color, TxnId>> ConflictGraph::by_color() const
{
    std::vector<std::pair<Color, TxnId>> out;
    for (const auto &[id, v] : vertices_)
    {
        if (v.color)
        {
            out.emplace_back(*v.color, id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool ConflictGraph::is_proper() const
{
    for (const auto &[id, v] : vertices_)
    {
        if (!v.color)
        {
            continue;
        }
        for (TxnId n : v.adj)
        {
            const auto &c = vertices_.at(n).color;
            if (c && *c == *v.color)
            {
                return false;
            }
        }
    }
    return true;
}

} // namespace shardsched

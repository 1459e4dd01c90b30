#include "shardsched/cover.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace shardsched
{

bool Cluster::contains(ShardId s) const { return std::binary_search(members.begin(), members.end(), s); }

bool operator==(const Cluster &a, const Cluster &b)
{
    return a.id == b.id && a.height == b.height && a.members == b.members && a.leader == b.leader && a.strong_diameter == b.strong_diameter;
}

bool operator==(const CoverHierarchy &a, const CoverHierarchy &b) { return a.clusters_ == b.clusters_ && a.layers_ == b.layers_; }

std::uint32_t log_factor(std::uint32_t s)
{
    std::uint32_t bits = 0;
    while ((std::uint64_t{1} << bits) < s)
    {
        ++bits;
    }
    return std::max<std::uint32_t>(1, bits);
}

std::uint32_t layer_count(Length diameter)
{
    if (diameter <= 0)
    {
        return 1;
    }
    std::uint32_t bits = 0;
    while ((Length{1} << bits) < diameter)
    {
        ++bits;
    }
    return bits + 1;
}

namespace
{

Length neighborhood_radius(std::uint32_t layer) { return (Length{1} << layer) - 1; }

Length strong_diameter(const ShardGraph &g, const std::vector<ShardId> &members)
{
    // The graph is stored as its metric closure, so the subgraph induced by any
    // member set is complete and member-to-member paths are direct edges.
    Length best = 0;
    for (std::size_t i = 0; i < members.size(); ++i)
    {
        for (std::size_t j = i + 1; j < members.size(); ++j)
        {
            best = std::max(best, g.distance(members[i], members[j]));
        }
    }
    return best;
}

bool includes_all(const Cluster &c, const std::vector<ShardId> &shards)
{
    return std::includes(c.members.begin(), c.members.end(), shards.begin(), shards.end());
}

using Partition = std::vector<CoverHierarchy::ClusterSpec>;

// Greedy ball carving for one sublayer. Candidate centers are tried in the
// given sequence; a candidate qualifies when its whole rho-ball is still
// uncovered, and then carves every uncovered shard within radius. Shards left
// over join the cluster of their nearest carved shard (within rho by
// construction).
Partition carve(const ShardGraph &g, const std::vector<ShardId> &sequence, Length radius, Length rho)
{
    const std::uint32_t n = g.size();
    std::vector<int> owner(n, -1);
    Partition parts;

    for (ShardId c : sequence)
    {
        if (owner[c.value] >= 0)
        {
            continue;
        }
        bool free_ball = true;
        for (ShardId u : g.z_neighborhood(c, rho))
        {
            if (owner[u.value] >= 0)
            {
                free_ball = false;
                break;
            }
        }
        if (!free_ball)
        {
            continue;
        }
        const int idx = static_cast<int>(parts.size());
        CoverHierarchy::ClusterSpec spec;
        spec.leader = c;
        for (std::uint32_t u = 0; u < n; ++u)
        {
            if (owner[u] < 0 && g.distance(c, ShardId{u}) <= radius)
            {
                owner[u] = idx;
                spec.members.emplace_back(u);
            }
        }
        parts.push_back(std::move(spec));
    }

    std::vector<int> attached(n, -1);
    for (std::uint32_t u = 0; u < n; ++u)
    {
        if (owner[u] >= 0)
        {
            continue;
        }
        Length best = std::numeric_limits<Length>::max();
        int target = -1;
        for (std::uint32_t w = 0; w < n; ++w)
        {
            if (owner[w] >= 0 && g.distance(ShardId{u}, ShardId{w}) < best)
            {
                best = g.distance(ShardId{u}, ShardId{w});
                target = owner[w];
            }
        }
        if (target < 0 || best > rho)
        {
            throw std::logic_error("build_hierarchy: carving left shard " + std::to_string(u) + " without a nearby cluster");
        }
        attached[u] = target;
    }
    for (std::uint32_t u = 0; u < n; ++u)
    {
        if (attached[u] >= 0)
        {
            auto &members = parts[static_cast<std::size_t>(attached[u])].members;
            members.insert(std::upper_bound(members.begin(), members.end(), ShardId{u}), ShardId{u});
        }
    }
    return parts;
}

std::vector<ShardId> uncontained_shards(const ShardGraph &g, const std::vector<Partition> &sublayers, Length rho)
{
    std::vector<ShardId> out;
    for (std::uint32_t v = 0; v < g.size(); ++v)
    {
        const auto ball = g.z_neighborhood(ShardId{v}, rho);
        bool ok = false;
        for (const auto &part : sublayers)
        {
            for (const auto &spec : part)
            {
                if (std::includes(spec.members.begin(), spec.members.end(), ball.begin(), ball.end()))
                {
                    ok = true;
                    break;
                }
            }
            if (ok)
            {
                break;
            }
        }
        if (!ok)
        {
            out.emplace_back(v);
        }
    }
    return out;
}

std::string join(const std::vector<ShardId> &v)
{
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        os << (i ? "," : "") << 'S' << v[i].value;
    }
    os << '}';
    return os.str();
}

} // namespace

CoverHierarchy CoverHierarchy::assemble(const ShardGraph &g, const std::vector<std::vector<std::vector<ClusterSpec>>> &layers)
{
    CoverHierarchy h;
    h.layers_.resize(layers.size());
    for (std::uint32_t q = 0; q < layers.size(); ++q)
    {
        for (std::uint32_t r = 0; r < layers[q].size(); ++r)
        {
            std::vector<ClusterId> ids;
            for (const auto &spec : layers[q][r])
            {
                Cluster c;
                c.id = ClusterId{static_cast<std::uint32_t>(h.clusters_.size())};
                c.height = Height{q, r};
                c.members = spec.members;
                std::sort(c.members.begin(), c.members.end());
                c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
                c.leader = spec.leader;
                c.strong_diameter = strong_diameter(g, c.members);
                ids.push_back(c.id);
                h.clusters_.push_back(std::move(c));
            }
            h.layers_[q].push_back(std::move(ids));
        }
    }
    return h;
}

std::uint32_t CoverHierarchy::max_sublayers() const noexcept
{
    std::size_t best = 0;
    for (const auto &layer : layers_)
    {
        best = std::max(best, layer.size());
    }
    return static_cast<std::uint32_t>(best);
}

const Cluster *CoverHierarchy::cluster_of(ShardId s, Height h) const
{
    for (ClusterId id : sublayer(h.layer, h.sublayer))
    {
        const Cluster &c = clusters_[id.value];
        if (c.contains(s))
        {
            return &c;
        }
    }
    return nullptr;
}

const Cluster &CoverHierarchy::home_cluster(const ShardGraph &g, ShardId home, const std::vector<ShardId> &dests) const
{
    if (dests.empty())
    {
        throw UsageError("home_cluster: empty destination set");
    }
    Length z = 0;
    for (ShardId d : dests)
    {
        z = std::max(z, g.distance(home, d));
    }
    const auto ball = g.z_neighborhood(home, z);
    for (std::uint32_t q = 0; q < layer_count(); ++q)
    {
        for (std::uint32_t r = 0; r < sublayer_count(q); ++r)
        {
            const Cluster *c = cluster_of(home, Height{q, r});
            if (c != nullptr && includes_all(*c, ball))
            {
                return *c;
            }
        }
    }
    throw std::logic_error("home_cluster: no cluster contains the " + std::to_string(z) + "-neighborhood of S" + std::to_string(home.value));
}

void CoverHierarchy::dump(std::ostream &os) const
{
    for (const Cluster &c : clusters_)
    {
        os << "cluster " << c.id.value << " height " << c.height.layer << ' ' << c.height.sublayer << " leader " << c.leader.value
           << " diameter " << c.strong_diameter << " members";
        for (ShardId m : c.members)
        {
            os << ' ' << m.value;
        }
        os << '\n';
    }
}

CoverHierarchy build_hierarchy(const ShardGraph &g, const CoverParams &params)
{
    const std::uint32_t n = g.size();
    const std::uint32_t lf = log_factor(n);
    const auto cap = static_cast<std::uint32_t>(std::floor(params.c_sub * lf));
    const std::uint32_t base = std::min(lf, std::max<std::uint32_t>(cap, 1));
    const std::uint32_t layers = layer_count(g.diameter());

    std::vector<std::vector<Partition>> all(layers);
    for (std::uint32_t q = 0; q < layers; ++q)
    {
        const Length radius = (Length{1} << q) * lf;
        const Length rho = neighborhood_radius(q);
        const std::uint32_t stride = (n + base - 1) / base;

        for (std::uint32_t r = 0; r < base; ++r)
        {
            std::vector<ShardId> order;
            order.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i)
            {
                order.emplace_back((i + r * stride) % n);
            }
            all[q].push_back(carve(g, order, radius, rho));
        }

        auto missing = uncontained_shards(g, all[q], rho);
        while (!missing.empty())
        {
            if (all[q].size() >= cap)
            {
                throw std::logic_error("build_hierarchy: layer " + std::to_string(q) + " needs more than " + std::to_string(cap) +
                                       " sublayers; uncovered " + join(missing));
            }
            std::vector<ShardId> sequence = missing;
            for (std::uint32_t i = 0; i < n; ++i)
            {
                sequence.emplace_back(i);
            }
            all[q].push_back(carve(g, sequence, radius, rho));
            missing = uncontained_shards(g, all[q], rho);
        }
    }

    CoverHierarchy h = CoverHierarchy::assemble(g, all);
    const CoverReport report = verify_cover(h, g, params);
    if (!report.passed())
    {
        std::ostringstream os;
        os << "build_hierarchy: constructed cover fails verification\n" << report;
        throw std::logic_error(os.str());
    }
    return h;
}

bool CoverReport::passed() const
{
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult &p) { return p.passed; });
}

const PropertyResult *CoverReport::find(const std::string &name) const
{
    for (const auto &p : properties)
    {
        if (p.name == name)
        {
            return &p;
        }
    }
    return nullptr;
}

CoverReport verify_cover(const CoverHierarchy &h, const ShardGraph &g, const CoverParams &params)
{
    const std::uint32_t n = g.size();
    const std::uint32_t lf = log_factor(n);
    const double membership_bound = params.c_sub * lf;

    PropertyResult partition{"partition", true, {}};
    PropertyResult leader{"leader", true, {}};
    PropertyResult diameter{"diameter", true, {}};
    PropertyResult membership{"membership", true, {}};
    PropertyResult containment{"containment", true, {}};

    auto fail = [](PropertyResult &p, std::string msg) {
        p.passed = false;
        p.counterexamples.push_back(std::move(msg));
    };

    for (std::uint32_t q = 0; q < h.layer_count(); ++q)
    {
        const Length rho = neighborhood_radius(q);
        std::vector<std::uint32_t> per_shard(n, 0);

        for (std::uint32_t r = 0; r < h.sublayer_count(q); ++r)
        {
            std::vector<std::uint32_t> seen(n, 0);
            for (ClusterId id : h.sublayer(q, r))
            {
                const Cluster &c = h.cluster(id);
                for (ShardId m : c.members)
                {
                    if (m.value < n)
                    {
                        ++seen[m.value];
                        ++per_shard[m.value];
                    }
                }

                if (!c.contains(c.leader))
                {
                    fail(leader, "cluster " + std::to_string(c.id.value) + ": leader S" + std::to_string(c.leader.value) + " is not a member");
                }
                else
                {
                    for (ShardId u : g.z_neighborhood(c.leader, rho))
                    {
                        if (!c.contains(u))
                        {
                            fail(leader, "cluster " + std::to_string(c.id.value) + ": S" + std::to_string(u.value) + " is within " +
                                             std::to_string(rho) + " of leader S" + std::to_string(c.leader.value) + " but outside");
                            break;
                        }
                    }
                }

                const double bound = params.c_diam * static_cast<double>(Length{1} << q) * lf;
                if (static_cast<double>(c.strong_diameter) > bound)
                {
                    fail(diameter, "cluster " + std::to_string(c.id.value) + ": strong diameter " + std::to_string(c.strong_diameter) +
                                       " exceeds " + std::to_string(bound));
                }
            }
            for (std::uint32_t s = 0; s < n; ++s)
            {
                if (seen[s] != 1)
                {
                    fail(partition, "layer " + std::to_string(q) + " sublayer " + std::to_string(r) + ": S" + std::to_string(s) +
                                        (seen[s] == 0 ? " is missing" : " appears more than once"));
                }
            }
        }

        for (std::uint32_t s = 0; s < n; ++s)
        {
            if (static_cast<double>(per_shard[s]) > membership_bound)
            {
                fail(membership, "layer " + std::to_string(q) + ": S" + std::to_string(s) + " is in " + std::to_string(per_shard[s]) + " clusters");
            }
            const auto ball = g.z_neighborhood(ShardId{s}, rho);
            bool ok = false;
            for (std::uint32_t r = 0; r < h.sublayer_count(q) && !ok; ++r)
            {
                for (ClusterId id : h.sublayer(q, r))
                {
                    if (includes_all(h.cluster(id), ball))
                    {
                        ok = true;
                        break;
                    }
                }
            }
            if (!ok)
            {
                fail(containment, "layer " + std::to_string(q) + ": no cluster contains " + join(ball) + ", the " + std::to_string(rho) +
                                      "-neighborhood of S" + std::to_string(s));
            }
        }
    }

    return CoverReport{{partition, leader, diameter, membership, containment}};
}

std::ostream &operator<<(std::ostream &os, const CoverReport &report)
{
    for (const auto &p : report.properties)
    {
        os << p.name << ": " << (p.passed ? "pass" : "FAIL") << '\n';
        for (const auto &c : p.counterexamples)
        {
            os << "  " << c << '\n';
        }
    }
    return os;
}

} // namespace shardsched

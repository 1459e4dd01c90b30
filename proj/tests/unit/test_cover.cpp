#include "shardsched/cover.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace shardsched;

namespace
{

ShardId S(std::uint32_t i) { return ShardId{i}; }

using Spec = CoverHierarchy::ClusterSpec;

std::vector<ShardId> shards(std::initializer_list<std::uint32_t> ids)
{
    std::vector<ShardId> out;
    for (auto i : ids)
    {
        out.push_back(S(i));
    }
    return out;
}

// Eight shards on a weighted line: 1 2 1 5 1 2 1 between consecutive shards.
ShardGraph eight_line()
{
    const Length x = ShardGraph::kNoEdge;
    const std::vector<Length> w = {1, 2, 1, 5, 1, 2, 1};
    std::vector<std::vector<Length>> m(8, std::vector<Length>(8, x));
    for (std::uint32_t i = 0; i < 8; ++i)
    {
        m[i][i] = 0;
    }
    for (std::uint32_t i = 0; i < 7; ++i)
    {
        m[i][i + 1] = m[i + 1][i] = w[i];
    }
    return ShardGraph::from_weights(m);
}

// Hand-built hierarchy over eight_line(): singletons, pairs, quads, everything.
CoverHierarchy hand_built(const ShardGraph &g)
{
    std::vector<std::vector<std::vector<Spec>>> layers(4);
    layers[0].emplace_back();
    for (std::uint32_t i = 0; i < 8; ++i)
    {
        layers[0][0].push_back({shards({i}), S(i)});
    }
    layers[1].push_back({{shards({0, 1}), S(0)}, {shards({2, 3}), S(2)}, {shards({4, 5}), S(4)}, {shards({6, 7}), S(6)}});
    layers[2].push_back({{shards({0, 1, 2, 3}), S(1)}, {shards({4, 5, 6, 7}), S(5)}});
    layers[3].push_back({{shards({0, 1, 2, 3, 4, 5, 6, 7}), S(3)}});
    return CoverHierarchy::assemble(g, layers);
}

std::vector<TopologySpec> topologies()
{
    return {topology::Clique{4, 1}, topology::Clique{16, 1}, topology::Line{4, 1},  topology::Line{9, 1},
            topology::Line{16, 2},  topology::Grid{3, 3, 1}, topology::Grid{4, 4, 1}, topology::RandomMetric{9, 3},
            topology::RandomMetric{25, 11}};
}

} // namespace

TEST(Cover, LayerCountFormula)
{
    EXPECT_EQ(layer_count(0), 1u);
    EXPECT_EQ(layer_count(1), 1u);
    EXPECT_EQ(layer_count(2), 2u);
    EXPECT_EQ(layer_count(3), 3u);
    EXPECT_EQ(layer_count(4), 3u);
    EXPECT_EQ(layer_count(5), 4u);
    EXPECT_EQ(log_factor(1), 1u);
    EXPECT_EQ(log_factor(2), 1u);
    EXPECT_EQ(log_factor(16), 4u);
    EXPECT_EQ(log_factor(17), 5u);
}

TEST(Cover, CliqueOfFourHasOneLayer)
{
    const ShardGraph g = build_graph(topology::Clique{4, 1});
    const CoverHierarchy h = build_hierarchy(g);
    EXPECT_EQ(h.layer_count(), 1u);
    EXPECT_TRUE(verify_cover(h, g).passed());
}

TEST(Cover, LineOfFourHasThreeLayers)
{
    const ShardGraph g = build_graph(topology::Line{4, 1});
    EXPECT_EQ(build_hierarchy(g).layer_count(), 3u);
}

TEST(Cover, BuiltHierarchiesSatisfyEveryProperty)
{
    for (const auto &spec : topologies())
    {
        const ShardGraph g = build_graph(spec);
        const CoverHierarchy h = build_hierarchy(g);
        const CoverReport report = verify_cover(h, g);
        std::ostringstream os;
        os << report;
        EXPECT_TRUE(report.passed()) << describe(spec) << "\n" << os.str();
        EXPECT_EQ(report.properties.size(), 5u);

        // The top layer has a cluster holding everything.
        const std::uint32_t top = h.layer_count() - 1;
        bool whole = false;
        for (std::uint32_t r = 0; r < h.sublayer_count(top); ++r)
        {
            for (ClusterId id : h.sublayer(top, r))
            {
                whole = whole || h.cluster(id).members.size() == g.size();
            }
        }
        EXPECT_TRUE(whole) << describe(spec);
    }
}

TEST(Cover, ConstructionIsDeterministic)
{
    for (const auto &spec : topologies())
    {
        const ShardGraph g = build_graph(spec);
        const CoverHierarchy a = build_hierarchy(g);
        const CoverHierarchy b = build_hierarchy(g);
        EXPECT_TRUE(a == b) << describe(spec);
        std::ostringstream da, db;
        a.dump(da);
        b.dump(db);
        EXPECT_EQ(da.str(), db.str());
    }
}

TEST(Cover, HomeClusterContainsHomeAndDestinations)
{
    for (const auto &spec : topologies())
    {
        const ShardGraph g = build_graph(spec);
        const CoverHierarchy h = build_hierarchy(g);
        for (std::uint32_t home = 0; home < g.size(); ++home)
        {
            for (std::uint32_t d = 0; d < g.size(); ++d)
            {
                const Cluster &c = h.home_cluster(g, S(home), {S(d)});
                EXPECT_TRUE(c.contains(S(home)));
                EXPECT_TRUE(c.contains(S(d)));
            }
        }
    }
}

TEST(Cover, HomeClusterIsMonotoneInDestinations)
{
    const ShardGraph g = build_graph(topology::Line{16, 1});
    const CoverHierarchy h = build_hierarchy(g);
    for (std::uint32_t home = 0; home < 16; ++home)
    {
        std::vector<ShardId> dests{S(home)};
        Height prev = h.home_cluster(g, S(home), dests).height;
        for (std::uint32_t d = 0; d < 16; ++d)
        {
            dests.push_back(S(d));
            const Height cur = h.home_cluster(g, S(home), dests).height;
            EXPECT_FALSE(cur < prev);
            prev = cur;
        }
    }
}

TEST(Cover, LocalTransactionResolvesToLayerZero)
{
    const ShardGraph g = build_graph(topology::Grid{3, 3, 1});
    const CoverHierarchy h = build_hierarchy(g);
    for (std::uint32_t i = 0; i < 9; ++i)
    {
        const Cluster &c = h.home_cluster(g, S(i), {S(i)});
        EXPECT_EQ(c.height, (Height{0, 0}));
        EXPECT_TRUE(c.contains(S(i)));
    }
    EXPECT_THROW((void)h.home_cluster(g, S(0), {}), UsageError);
}

TEST(Cover, HandBuiltLineResolvesHomeClusters)
{
    const ShardGraph g = eight_line();
    const CoverHierarchy h = hand_built(g);

    // Shard 3 touching {3, 4} (indices 2, 3): the pair at layer 1.
    const Cluster &x = h.home_cluster(g, S(2), {S(2), S(3)});
    EXPECT_EQ(x.height.layer, 1u);
    EXPECT_EQ(x.members, shards({2, 3}));

    // Shard 5 touching {5, 8} (indices 4, 7): distance 4, the right quad at layer 2.
    const Cluster &y = h.home_cluster(g, S(4), {S(4), S(7)});
    EXPECT_EQ(y.height.layer, 2u);
    EXPECT_EQ(y.members, shards({4, 5, 6, 7}));
}

TEST(Cover, HeightsOrderLexicographically)
{
    EXPECT_LT((Height{0, 5}), (Height{1, 0}));
    EXPECT_LT((Height{1, 0}), (Height{1, 1}));
    EXPECT_EQ((Height{2, 3}), (Height{2, 3}));
}

TEST(Cover, MissingShardFailsPartitionAndNamesIt)
{
    const ShardGraph g = build_graph(topology::Clique{4, 1});
    std::vector<std::vector<std::vector<Spec>>> layers(1);
    layers[0].push_back({{shards({0}), S(0)}, {shards({1}), S(1)}, {shards({3}), S(3)}});
    const CoverReport report = verify_cover(CoverHierarchy::assemble(g, layers), g);
    const PropertyResult *p = report.find("partition");
    ASSERT_NE(p, nullptr);
    EXPECT_FALSE(p->passed);
    ASSERT_FALSE(p->counterexamples.empty());
    EXPECT_NE(p->counterexamples.front().find("S2"), std::string::npos);
    EXPECT_FALSE(report.passed());
}

TEST(Cover, LeaderWhoseNeighborhoodLeaksFailsLeaderRule)
{
    const ShardGraph g = build_graph(topology::Line{4, 1});
    std::vector<std::vector<std::vector<Spec>>> layers(2);
    layers[0].push_back({{shards({0}), S(0)}, {shards({1}), S(1)}, {shards({2}), S(2)}, {shards({3}), S(3)}});
    // Layer 1 needs the 1-neighborhood of the leader inside; S2's reaches S3.
    layers[1].push_back({{shards({0, 1, 2}), S(2)}, {shards({3}), S(3)}});
    const CoverReport report = verify_cover(CoverHierarchy::assemble(g, layers), g);
    const PropertyResult *p = report.find("leader");
    ASSERT_NE(p, nullptr);
    EXPECT_FALSE(p->passed);
    EXPECT_TRUE(report.find("partition")->passed);
}

TEST(Cover, OversizedClusterFailsDiameter)
{
    const ShardGraph g = build_graph(topology::Line{16, 1});
    std::vector<std::vector<std::vector<Spec>>> layers(1);
    std::vector<ShardId> all;
    for (std::uint32_t i = 0; i < 16; ++i)
    {
        all.push_back(S(i));
    }
    layers[0].push_back({{all, S(0)}});
    const CoverReport report = verify_cover(CoverHierarchy::assemble(g, layers), g, CoverParams{1.0, 4.0});
    EXPECT_FALSE(report.find("diameter")->passed);
    EXPECT_TRUE(report.find("containment")->passed);
}

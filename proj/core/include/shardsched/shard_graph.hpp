#pragma once

#include "shardsched/types.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace shardsched
{

namespace topology
{
struct Clique
{
    std::uint32_t shards = 1;
    Length weight = 1;
};

struct Line
{
    std::uint32_t shards = 1;
    Length weight = 1;
};

struct Grid
{
    std::uint32_t rows = 1;
    std::uint32_t cols = 1;
    Length weight = 1;
};

/// Shards are distinct points on an integer grid, distances are Manhattan.
struct RandomMetric
{
    std::uint32_t shards = 1;
    std::uint64_t seed = 0;
};
} // namespace topology

using TopologySpec = std::variant<topology::Clique, topology::Line, topology::Grid, topology::RandomMetric>;

std::string describe(const TopologySpec &spec);

/// Weighted shard graph, stored as its metric closure. Immutable after
/// construction.
class ShardGraph
{
public:
    /// Builds from an explicit symmetric weight matrix. Entries equal to
    /// kNoEdge mean "no direct edge"; everything is closed under shortest paths.
    /// Throws ConfigError when the graph is disconnected, asymmetric or has a
    /// non-positive off-diagonal edge.
    static ShardGraph from_weights(std::vector<std::vector<Length>> weights);

    static constexpr Length kNoEdge = -1;

    std::uint32_t size() const noexcept { return n_; }
    Length diameter() const noexcept { return diameter_; }

    Length distance(ShardId i, ShardId j) const;

    /// Shards within distance z of i, ascending by index. Always contains i.
    std::vector<ShardId> z_neighborhood(ShardId i, Length z) const;

    bool contains(ShardId i) const noexcept { return i.value < n_; }

private:
    ShardGraph() = default;

    std::uint32_t n_ = 0;
    std::vector<Length> dist_;
    Length diameter_ = 0;
};

ShardGraph build_graph(const TopologySpec &spec);

} // namespace shardsched

#pragma once

#include "shardsched/shard_graph.hpp"
#include "shardsched/types.hpp"

#include <compare>
#include <iosfwd>
#include <string>
#include <vector>

namespace shardsched
{

/// (layer, sublayer). Ordered lexicographically.
struct Height
{
    std::uint32_t layer = 0;
    std::uint32_t sublayer = 0;

    constexpr auto operator<=>(const Height &) const = default;
};

struct Cluster
{
    ClusterId id;
    Height height;
    std::vector<ShardId> members; // ascending
    ShardId leader;
    Length strong_diameter = 0;

    bool contains(ShardId s) const;
};

struct CoverParams
{
    double c_diam = 4.0;
    double c_sub = 4.0;
};

/// max(1, ceil(log2 s)).
std::uint32_t log_factor(std::uint32_t s);

/// Number of layers for diameter D: ceil(log2 D) + 1, and 1 when D = 0.
std::uint32_t layer_count(Length diameter);

/// Layered sparse cover. Each layer is a list of sublayers; each sublayer is a
/// partition of all shards into clusters. Cluster ids index clusters().
class CoverHierarchy
{
public:
    /// Assembles a hierarchy from explicit sublayer partitions. layers[q][r] is
    /// a list of (members, leader). Heights and ids are assigned in order;
    /// strong diameters are computed from g. No invariant is checked here, so
    /// hand-built (possibly invalid) hierarchies can be fed to verify_cover.
    struct ClusterSpec
    {
        std::vector<ShardId> members;
        ShardId leader;
    };
    static CoverHierarchy assemble(const ShardGraph &g, const std::vector<std::vector<std::vector<ClusterSpec>>> &layers);

    std::uint32_t layer_count() const noexcept { return static_cast<std::uint32_t>(layers_.size()); }
    std::uint32_t sublayer_count(std::uint32_t layer) const { return static_cast<std::uint32_t>(layers_.at(layer).size()); }

    /// Largest sublayer count over all layers.
    std::uint32_t max_sublayers() const noexcept;

    const std::vector<ClusterId> &sublayer(std::uint32_t layer, std::uint32_t sub) const { return layers_.at(layer).at(sub); }
    const Cluster &cluster(ClusterId id) const { return clusters_.at(id.value); }
    const std::vector<Cluster> &clusters() const noexcept { return clusters_; }

    /// Cluster of the given sublayer containing s, or nullptr if the sublayer
    /// does not cover s.
    const Cluster *cluster_of(ShardId s, Height h) const;

    /// Lowest-height cluster containing the z-neighborhood of home, where z is
    /// the farthest destination. Throws UsageError for empty dests, and
    /// std::logic_error if no cluster qualifies (broken hierarchy).
    const Cluster &home_cluster(const ShardGraph &g, ShardId home, const std::vector<ShardId> &dests) const;

    /// One record per cluster: "cluster <id> height <q> <r> leader <l> diameter <d> members <m...>".
    void dump(std::ostream &os) const;

    friend bool operator==(const CoverHierarchy &, const CoverHierarchy &);

private:
    std::vector<Cluster> clusters_;
    std::vector<std::vector<std::vector<ClusterId>>> layers_;
};

bool operator==(const Cluster &a, const Cluster &b);

/// Deterministic ball-carving construction. Throws std::logic_error if the
/// result fails verify_cover or needs more than c_sub * log_factor(s)
/// sublayers in some layer.
CoverHierarchy build_hierarchy(const ShardGraph &g, const CoverParams &params = {});

struct PropertyResult
{
    std::string name;
    bool passed = true;
    std::vector<std::string> counterexamples;
};

struct CoverReport
{
    std::vector<PropertyResult> properties;

    bool passed() const;
    const PropertyResult *find(const std::string &name) const;
};

/// Checks partition per sublayer, leader rule, strong-diameter bound,
/// per-layer membership bound and (2^q - 1)-neighborhood containment.
/// Property names: "partition", "leader", "diameter", "membership",
/// "containment".
CoverReport verify_cover(const CoverHierarchy &h, const ShardGraph &g, const CoverParams &params = {});

std::ostream &operator<<(std::ostream &os, const CoverReport &report);

} // namespace shardsched

#pragma once

#include "shardsched/conflict_graph.hpp"
#include "shardsched/cover.hpp"
#include "shardsched/engine.hpp"
#include "shardsched/messages.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/trace.hpp"
#include "shardsched/workload.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace shardsched
{

enum class Algorithm : std::uint8_t
{
    A1, // stateless, single leader
    A2, // stateless, one leader per cluster
    A3, // stateful, single leader
    A4, // stateful, one leader per cluster
};

std::string_view to_string(Algorithm a);

/// "a1".."a4". Throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view name);

inline bool is_stateful(Algorithm a) { return a == Algorithm::A3 || a == Algorithm::A4; }
inline bool is_multi_leader(Algorithm a) { return a == Algorithm::A2 || a == Algorithm::A4; }

struct SchedulerConfig
{
    Algorithm algorithm = Algorithm::A1;
    ShardId leader{0};                    // single-leader variants
    std::optional<std::uint32_t> lambda;  // stateful: overrides the computed value for every leader
    bool retry = false;                   // resubmit aborted transactions as fresh clones
    std::optional<KeyOrder> order;        // default: color-major for a1/a3, timestamp-major for a2/a4
    ConflictMode conflict = ConflictMode::Shard;
};

KeyOrder key_order(const SchedulerConfig &cfg);

/// Batching parameter of a stateful leader: max(1, stretch * diameter).
std::uint32_t stateful_lambda(std::int64_t stretch, Length diameter);

struct SimulationOptions
{
    SchedulerConfig scheduler;
    DelayModel delays;
    Tick horizon = 10'000'000;  // engine stops here even if events remain
    Engine::DropFilter drop;    // fault injection, normally empty
};

/// Runs one simulation to quiescence (or the horizon). The hierarchy is only
/// consulted by the multi-leader variants; when it is null and one is needed,
/// the default construction is used.
RunTrace simulate(const ShardGraph &g, const CoverHierarchy *cover, Workload &workload, const SimulationOptions &options);

} // namespace shardsched

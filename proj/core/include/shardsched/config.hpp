#pragma once

#include "shardsched/cover.hpp"
#include "shardsched/scheduler.hpp"
#include "shardsched/shard_graph.hpp"
#include "shardsched/workload.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace shardsched
{

/// Everything that determines a run. Parsed from an INI file with the
/// sections topology, workload, scheduler, delay and output.
struct RunConfig
{
    TopologySpec topology = topology::Clique{8, 1};
    CoverParams cover;
    WorkloadSpec workload;
    SchedulerConfig scheduler;
    std::int64_t stretch = 1;   // 1 = synchronous
    Tick max_time = 10'000'000; // engine horizon
    std::string output_dir = ".";

    /// Delay sampling seed, derived from the workload seed.
    DelayModel delays() const;
    SimulationOptions options() const;
};

inline constexpr const char *kSeedEnv = "SHARDSIM_SEED";

/// Throws ConfigError on syntax errors, unknown sections or keys, and
/// out-of-range values. When the file sets no seed, SHARDSIM_SEED is used if
/// present.
RunConfig parse_config(std::istream &in);
RunConfig load_config(const std::string &path);

/// Flat "section.key" -> value view of a config, as parse_config would accept it.
std::map<std::string, std::string> config_entries(const RunConfig &cfg);

void write_config(std::ostream &os, const RunConfig &cfg);

} // namespace shardsched

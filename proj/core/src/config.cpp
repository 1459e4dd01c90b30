#include "shardsched/config.hpp"

#include "shardsched/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace shardsched
{

DelayModel RunConfig::delays() const
{
    if (stretch == 1)
    {
        return DelayModel::synchronous();
    }
    return DelayModel::partial(stretch, derive_seed(workload.seed, 0xde1a));
}

SimulationOptions RunConfig::options() const
{
    SimulationOptions o;
    o.scheduler = scheduler;
    o.delays = delays();
    o.horizon = max_time;
    return o;
}

namespace
{

namespace pt = boost::property_tree;

template <typename T> T parse_number(const std::string &key, const std::string &text)
{
    T value{};
    const char *first = text.data();
    const char *last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
    {
        throw ConfigError(key + ": '" + text + "' is not a valid number");
    }
    return value;
}

bool parse_bool(const std::string &key, const std::string &text)
{
    if (text == "true" || text == "1" || text == "yes")
    {
        return true;
    }
    if (text == "false" || text == "0" || text == "no")
    {
        return false;
    }
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <typename T> T positive(const std::string &key, T v)
{
    if (v <= 0)
    {
        throw ConfigError(key + " must be positive");
    }
    return v;
}

// Topology fields are collected first since the kind decides which apply.
struct TopologyFields
{
    std::string kind = "clique";
    std::uint32_t shards = 8;
    Length weight = 1;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint64_t seed = 0;
};

TopologySpec make_topology(const TopologyFields &f)
{
    if (f.kind == "clique")
    {
        return topology::Clique{f.shards, f.weight};
    }
    if (f.kind == "line")
    {
        return topology::Line{f.shards, f.weight};
    }
    if (f.kind == "grid")
    {
        if (f.rows == 0 || f.cols == 0)
        {
            throw ConfigError("topology.grid needs rows and cols");
        }
        return topology::Grid{f.rows, f.cols, f.weight};
    }
    if (f.kind == "random")
    {
        return topology::RandomMetric{f.shards, f.seed};
    }
    throw ConfigError("topology.kind: unknown topology '" + f.kind + "'");
}

} // namespace

RunConfig parse_config(std::istream &in)
{
    pt::ptree tree;
    try
    {
        pt::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }

    RunConfig cfg;
    TopologyFields topo;
    bool seed_given = false;
    using Setter = std::function<void(const std::string &, const std::string &)>;
    const std::map<std::string, std::map<std::string, Setter>> schema = {
        {"topology",
         {
             {"kind", [&](auto &, auto &v) { topo.kind = v; }},
             {"shards", [&](auto &k, auto &v) { topo.shards = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"weight", [&](auto &k, auto &v) { topo.weight = positive(k, parse_number<Length>(k, v)); }},
             {"rows", [&](auto &k, auto &v) { topo.rows = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"cols", [&](auto &k, auto &v) { topo.cols = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"seed", [&](auto &k, auto &v) { topo.seed = parse_number<std::uint64_t>(k, v); }},
             {"c_diam", [&](auto &k, auto &v) { cfg.cover.c_diam = positive(k, parse_number<double>(k, v)); }},
             {"c_sub", [&](auto &k, auto &v) { cfg.cover.c_sub = positive(k, parse_number<double>(k, v)); }},
         }},
        {"workload",
         {
             {"k_max", [&](auto &k, auto &v) { cfg.workload.k_max = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"d_max", [&](auto &k, auto &v) { cfg.workload.d_max = parse_number<Length>(k, v); }},
             {"write_prob",
              [&](auto &k, auto &v) {
                  const double p = parse_number<double>(k, v);
                  if (p < 0.0 || p > 1.0)
                  {
                      throw ConfigError(k + " must lie in [0, 1]");
                  }
                  cfg.workload.write_prob = p;
              }},
             {"skew",
              [&](auto &k, auto &v) {
                  if (v == "uniform")
                  {
                      cfg.workload.skew = Skew::Uniform;
                  }
                  else if (v == "zipf")
                  {
                      cfg.workload.skew = Skew::Zipf;
                  }
                  else
                  {
                      throw ConfigError(k + ": expected uniform or zipf, got '" + v + "'");
                  }
              }},
             {"zipf_alpha", [&](auto &k, auto &v) { cfg.workload.zipf_alpha = positive(k, parse_number<double>(k, v)); }},
             {"txn_count", [&](auto &k, auto &v) { cfg.workload.txn_count = parse_number<std::uint64_t>(k, v); }},
             {"horizon", [&](auto &k, auto &v) { cfg.workload.horizon = parse_number<Tick>(k, v); }},
             {"seed",
              [&](auto &k, auto &v) {
                  cfg.workload.seed = parse_number<std::uint64_t>(k, v);
                  seed_given = true;
              }},
             {"accounts_per_shard", [&](auto &k, auto &v) { cfg.workload.accounts_per_shard = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"initial_balance", [&](auto &k, auto &v) { cfg.workload.initial_balance = parse_number<std::int64_t>(k, v); }},
             {"max_amount", [&](auto &k, auto &v) { cfg.workload.max_amount = positive(k, parse_number<std::int64_t>(k, v)); }},
         }},
        {"scheduler",
         {
             {"algorithm", [&](auto &, auto &v) { cfg.scheduler.algorithm = parse_algorithm(v); }},
             {"leader", [&](auto &k, auto &v) { cfg.scheduler.leader = ShardId{parse_number<std::uint32_t>(k, v)}; }},
             {"lambda", [&](auto &k, auto &v) { cfg.scheduler.lambda = positive(k, parse_number<std::uint32_t>(k, v)); }},
             {"retry", [&](auto &k, auto &v) { cfg.scheduler.retry = parse_bool(k, v); }},
             {"order",
              [&](auto &k, auto &v) {
                  if (v == "color")
                  {
                      cfg.scheduler.order = KeyOrder::ColorMajor;
                  }
                  else if (v == "timestamp")
                  {
                      cfg.scheduler.order = KeyOrder::TimestampMajor;
                  }
                  else
                  {
                      throw ConfigError(k + ": expected color or timestamp, got '" + v + "'");
                  }
              }},
             {"conflict",
              [&](auto &k, auto &v) {
                  if (v == "shard")
                  {
                      cfg.scheduler.conflict = ConflictMode::Shard;
                  }
                  else if (v == "account")
                  {
                      cfg.scheduler.conflict = ConflictMode::Account;
                  }
                  else
                  {
                      throw ConfigError(k + ": expected shard or account, got '" + v + "'");
                  }
              }},
             {"max_time", [&](auto &k, auto &v) { cfg.max_time = positive(k, parse_number<Tick>(k, v)); }},
         }},
        {"delay",
         {
             {"mode",
              [&](auto &k, auto &v) {
                  if (v == "sync")
                  {
                      cfg.stretch = 1;
                  }
                  else if (v != "partial")
                  {
                      throw ConfigError(k + ": expected sync or partial, got '" + v + "'");
                  }
              }},
             {"stretch", [&](auto &k, auto &v) { cfg.stretch = positive(k, parse_number<std::int64_t>(k, v)); }},
         }},
        {"output",
         {
             {"dir", [&](auto &, auto &v) { cfg.output_dir = v; }},
         }},
    };

    std::string delay_mode;
    for (const auto &[section, body] : tree)
    {
        auto s = schema.find(section);
        if (s == schema.end())
        {
            if (body.empty())
            {
                throw ConfigError("config: key '" + section + "' outside any section");
            }
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto &[key, value] : body)
        {
            const std::string full = section + "." + key;
            auto f = s->second.find(key);
            if (f == s->second.end())
            {
                throw ConfigError("config: unknown key " + full);
            }
            const std::string text = value.get_value<std::string>();
            if (full == "delay.mode")
            {
                delay_mode = text;
            }
            f->second(full, text);
        }
    }
    if (delay_mode == "sync" && cfg.stretch != 1)
    {
        throw ConfigError("delay.stretch must be 1 when delay.mode = sync");
    }
    cfg.topology = make_topology(topo);
    if (!seed_given)
    {
        if (const char *env = std::getenv(kSeedEnv))
        {
            cfg.workload.seed = parse_number<std::uint64_t>(kSeedEnv, env);
        }
    }
    return cfg;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(in);
}

std::map<std::string, std::string> config_entries(const RunConfig &cfg)
{
    std::map<std::string, std::string> e;
    auto num = [](auto v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    std::visit(
        [&](const auto &t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, topology::Clique> || std::is_same_v<T, topology::Line>)
            {
                e["topology.kind"] = std::is_same_v<T, topology::Clique> ? "clique" : "line";
                e["topology.shards"] = num(t.shards);
                e["topology.weight"] = num(t.weight);
            }
            else if constexpr (std::is_same_v<T, topology::Grid>)
            {
                e["topology.kind"] = "grid";
                e["topology.rows"] = num(t.rows);
                e["topology.cols"] = num(t.cols);
                e["topology.weight"] = num(t.weight);
            }
            else
            {
                e["topology.kind"] = "random";
                e["topology.shards"] = num(t.shards);
                e["topology.seed"] = num(t.seed);
            }
        },
        cfg.topology);
    e["topology.c_diam"] = num(cfg.cover.c_diam);
    e["topology.c_sub"] = num(cfg.cover.c_sub);

    const WorkloadSpec &w = cfg.workload;
    e["workload.k_max"] = num(w.k_max);
    e["workload.d_max"] = num(w.d_max);
    e["workload.write_prob"] = num(w.write_prob);
    e["workload.skew"] = w.skew == Skew::Zipf ? "zipf" : "uniform";
    e["workload.zipf_alpha"] = num(w.zipf_alpha);
    e["workload.txn_count"] = num(w.txn_count);
    if (w.horizon != kNever)
    {
        e["workload.horizon"] = num(w.horizon);
    }
    e["workload.seed"] = num(w.seed);
    e["workload.accounts_per_shard"] = num(w.accounts_per_shard);
    e["workload.initial_balance"] = num(w.initial_balance);
    e["workload.max_amount"] = num(w.max_amount);

    const SchedulerConfig &s = cfg.scheduler;
    e["scheduler.algorithm"] = std::string(to_string(s.algorithm));
    e["scheduler.leader"] = num(s.leader.value);
    if (s.lambda)
    {
        e["scheduler.lambda"] = num(*s.lambda);
    }
    e["scheduler.retry"] = s.retry ? "true" : "false";
    e["scheduler.order"] = key_order(s) == KeyOrder::ColorMajor ? "color" : "timestamp";
    e["scheduler.conflict"] = s.conflict == ConflictMode::Shard ? "shard" : "account";
    e["scheduler.max_time"] = num(cfg.max_time);

    e["delay.mode"] = cfg.stretch == 1 ? "sync" : "partial";
    e["delay.stretch"] = num(cfg.stretch);
    e["output.dir"] = cfg.output_dir;
    return e;
}

void write_config(std::ostream &os, const RunConfig &cfg)
{
    std::string current;
    for (const auto &[key, value] : config_entries(cfg))
    {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != current)
        {
            os << (current.empty() ? "" : "\n") << '[' << section << "]\n";
            current = section;
        }
        os << key.substr(dot + 1) << " = " << value << '\n';
    }
}

} // namespace shardsched

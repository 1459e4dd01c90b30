#include "cli.hpp"

#include "shardsched/harness.hpp"
#include "shardsched/oracle.hpp"
#include "shardsched/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace shardsim
{

using namespace shardsched;
using nlohmann::json;

namespace
{

constexpr const char *kRatioNote = "ratios are measured against a certified lower bound on the optimal batch time "
                                   "(l stateless, max(l, d_hat) stateful), so they over-estimate the true ratio";

std::ofstream open_out(const std::filesystem::path &p)
{
    std::ofstream f(p);
    if (!f)
    {
        throw ConfigError("cannot write " + p.string());
    }
    return f;
}

json verdict_json(const Verdict &v) { return json{{"passed", v.passed}, {"details", v.details}}; }

// ---- run ----

struct RunArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool trace = false;
};

int cmd_run(const RunArgs &a, std::ostream &out)
{
    RunConfig cfg = load_config(a.config);
    if (a.seed)
    {
        cfg.workload.seed = *a.seed;
    }
    if (!a.out_dir.empty())
    {
        cfg.output_dir = a.out_dir;
    }
    const RunOutcome r = execute(cfg);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    {
        auto f = open_out(dir / "txns.csv");
        write_txn_csv(f, r.trace, r.graph);
    }
    {
        auto f = open_out(dir / "snapshots.csv");
        write_snapshot_csv(f, r.snapshots);
    }
    if (a.trace)
    {
        auto f = open_out(dir / "trace.txt");
        r.trace.write_lines(f);
    }

    const std::string hash = hex_hash(r.trace.hash());
    json j;
    j["note"] = kRatioNote;
    j["config"] = config_entries(cfg);
    j["seed"] = cfg.workload.seed;
    j["trace_hash"] = hash;
    for (const auto &v : r.verdicts)
    {
        j["verdicts"][v.name] = verdict_json(v);
    }
    if (r.makespan_bound)
    {
        j["bounds"]["makespan"] = verdict_json(*r.makespan_bound);
    }
    const RunStats &s = r.stats;
    j["stats"] = {
        {"generated", s.generated},       {"committed", s.committed},
        {"aborted", s.aborted},           {"unfinished", s.unfinished},
        {"mean_latency", s.mean_latency}, {"median_latency", s.median_latency},
        {"p99_latency", s.p99_latency},   {"throughput", s.throughput},
        {"makespan", s.makespan},         {"max_ratio", s.max_ratio},
        {"snapshots", r.snapshots.size()}, {"snapshots_below_one", r.below_one},
        {"max_queue_length", r.trace.max_queue_length},
    };
    j["messages"] = {{"sent", r.trace.messages_sent}, {"delivered", r.trace.messages_delivered}, {"dropped", r.trace.messages_dropped}};
    j["messages_by_kind"] = r.trace.messages_by_kind;
    {
        auto f = open_out(dir / "summary.json");
        f << j.dump(2) << '\n';
    }

    out << "# " << kRatioNote << '\n';
    out << "algorithm " << to_string(cfg.scheduler.algorithm) << " seed " << cfg.workload.seed << " trace_hash " << hash << '\n';
    out << "committed " << s.committed << " aborted " << s.aborted << " unfinished " << s.unfinished << " makespan " << s.makespan
        << " max_ratio " << s.max_ratio << '\n';
    for (const auto &v : r.verdicts)
    {
        out << v << '\n';
    }
    if (r.makespan_bound)
    {
        out << "(bound) " << *r.makespan_bound << '\n';
    }
    return all_passed(r.verdicts) ? 0 : 1;
}

// ---- verify-cover ----

struct TopologyArgs
{
    std::string config;
    std::string kind = "clique";
    std::uint32_t shards = 16;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    Length weight = 1;
    std::uint64_t seed = 0;
    double c_diam = 4.0;
    double c_sub = 4.0;
};

std::pair<TopologySpec, CoverParams> topology_from(const TopologyArgs &a)
{
    if (!a.config.empty())
    {
        const RunConfig cfg = load_config(a.config);
        return {cfg.topology, cfg.cover};
    }
    std::ostringstream ini;
    ini << "[topology]\nkind=" << a.kind << "\nshards=" << a.shards << "\nweight=" << a.weight << "\nseed=" << a.seed << "\nc_diam=" << a.c_diam
        << "\nc_sub=" << a.c_sub << '\n';
    if (a.rows != 0)
    {
        ini << "rows=" << a.rows << '\n';
    }
    if (a.cols != 0)
    {
        ini << "cols=" << a.cols << '\n';
    }
    std::istringstream in(ini.str());
    const RunConfig cfg = parse_config(in);
    return {cfg.topology, cfg.cover};
}

int cmd_verify_cover(const TopologyArgs &a, bool dump, std::ostream &out)
{
    const auto [topo, params] = topology_from(a);
    const ShardGraph g = build_graph(topo);
    const CoverHierarchy h = build_hierarchy(g, params);
    const CoverReport report = verify_cover(h, g, params);
    out << describe(topo) << ": " << h.clusters().size() << " clusters in " << h.layer_count() << " layers\n";
    if (dump)
    {
        h.dump(out);
    }
    out << report;
    return report.passed() ? 0 : 1;
}

// ---- oracle-compare ----

struct OracleArgs
{
    std::size_t instances = 200;
    std::uint32_t max_vertices = 12;
    std::uint32_t shards = 8;
    std::uint32_t k = 3;
    std::uint64_t seed = 1;
    std::vector<std::string> edge_lists;
    std::string out_file;
};

int cmd_oracle_compare(const OracleArgs &a, std::ostream &out, std::ostream &err)
{
    if (a.max_vertices == 0 || a.max_vertices > kOracleBudget)
    {
        throw ConfigError("--max-vertices must lie in [1, " + std::to_string(kOracleBudget) + "]");
    }
    std::ofstream file;
    if (!a.out_file.empty())
    {
        file = open_out(a.out_file);
    }
    std::ostream &csv = a.out_file.empty() ? out : file;
    csv << "source,vertices,edges,greedy,chi,max_degree,chi_input\n";
    bool ok = true;

    const ShardGraph g = build_graph(topology::Clique{a.shards, 1});
    WorkloadSpec spec;
    spec.k_max = a.k;
    spec.seed = a.seed;
    RandomWorkload gen(g, spec);
    Rng rng(derive_seed(a.seed, 0x0c1e));
    for (std::size_t i = 0; i < a.instances; ++i)
    {
        const auto n = static_cast<std::uint32_t>(rng.between(1, a.max_vertices));
        ConflictGraph cg;
        std::vector<TxnId> order;
        for (std::uint32_t v = 0; v < n; ++v)
        {
            const Transaction t = gen.next_txn(ShardId{static_cast<std::uint32_t>(rng.below(a.shards))}, 0, TxnId{v});
            cg.extend(t);
            order.push_back(t.id);
        }
        try
        {
            const GreedyComparison c = greedy_vs_optimal(cg, order);
            csv << "random-" << i << ',' << n << ',' << cg.edge_count() << ',' << c.greedy << ',' << c.optimal << ',' << c.max_degree << ",\n";
        }
        catch (const std::logic_error &e)
        {
            ok = false;
            csv << "random-" << i << ',' << n << ',' << cg.edge_count() << ",,,," << '\n';
            err << e.what() << '\n';
        }
    }

    for (const std::string &path : a.edge_lists)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("cannot open edge list " + path);
        }
        const SimpleGraph h = read_edge_list(in);
        const ReductionInstance inst = reduction_instance(h);
        ConflictGraph cg;
        std::vector<TxnId> order;
        for (const Transaction &t : inst.txns)
        {
            cg.extend(t);
            order.push_back(t.id);
        }
        const std::uint32_t chi_h = chromatic_number(h.adjacency());
        try
        {
            const GreedyComparison c = greedy_vs_optimal(cg, order);
            ok = ok && c.optimal == chi_h;
            csv << std::filesystem::path(path).filename().string() << ',' << h.n << ',' << cg.edge_count() << ',' << c.greedy << ',' << c.optimal << ','
                << c.max_degree << ',' << chi_h << '\n';
        }
        catch (const std::logic_error &e)
        {
            ok = false;
            err << e.what() << '\n';
        }
    }
    return ok ? 0 : 1;
}

// ---- sweep ----

struct SweepArgs
{
    std::string config;
    std::string topology = "clique";
    std::vector<std::string> algorithms{"a1", "a3"};
    std::vector<std::uint32_t> shards{4, 9, 16};
    std::vector<std::uint32_t> ks{2};
    std::vector<std::int64_t> stretches{1};
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t txns = 200;
    unsigned jobs = 0;
    std::string out_file;
};

struct Cell
{
    RunConfig cfg;
    std::string topology;
    std::uint32_t shards = 0;
    std::string row;
    bool passed = true;
};

TopologySpec sweep_topology(const std::string &kind, std::uint32_t s, std::uint64_t seed)
{
    if (kind == "clique")
    {
        return topology::Clique{s, 1};
    }
    if (kind == "line")
    {
        return topology::Line{s, 1};
    }
    if (kind == "grid")
    {
        const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(s))));
        if (side * side != s)
        {
            throw ConfigError("sweep: grid needs square shard counts, got " + std::to_string(s));
        }
        return topology::Grid{side, side, 1};
    }
    if (kind == "random")
    {
        return topology::RandomMetric{s, seed};
    }
    throw ConfigError("sweep: unknown topology '" + kind + "'");
}

std::string sweep_row(const Cell &c, const RunOutcome &r)
{
    double mean_ratio = 0.0;
    for (const auto &s : r.snapshots)
    {
        mean_ratio += s.ratio;
    }
    if (!r.snapshots.empty())
    {
        mean_ratio /= static_cast<double>(r.snapshots.size());
    }
    std::string failed;
    for (const auto &v : r.verdicts)
    {
        if (!v.passed)
        {
            failed += (failed.empty() ? "" : ";") + v.name;
        }
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << to_string(c.cfg.scheduler.algorithm) << ',' << c.topology << ',' << c.shards << ',' << c.cfg.workload.k_max << ',' << c.cfg.stretch << ','
       << c.cfg.workload.seed << ',' << r.stats.generated << ',' << r.stats.committed << ',' << r.stats.aborted << ',' << r.stats.makespan << ','
       << r.stats.mean_latency << ',' << r.stats.p99_latency << ',' << r.stats.max_ratio << ',' << mean_ratio << ',' << r.snapshots.size() << ','
       << (failed.empty() ? "pass" : failed) << ',' << hex_hash(r.trace.hash());
    return os.str();
}

int cmd_sweep(const SweepArgs &a, std::ostream &out, std::ostream &err)
{
    RunConfig base;
    if (!a.config.empty())
    {
        base = load_config(a.config);
    }
    std::vector<Cell> cells;
    for (const std::string &alg : a.algorithms)
    {
        for (std::uint32_t s : a.shards)
        {
            for (std::uint32_t k : a.ks)
            {
                for (std::int64_t stretch : a.stretches)
                {
                    for (std::uint64_t seed : a.seeds)
                    {
                        Cell c{base, a.topology, s, {}, true};
                        c.cfg.topology = sweep_topology(a.topology, s, seed);
                        c.cfg.scheduler.algorithm = parse_algorithm(alg);
                        c.cfg.workload.k_max = k;
                        c.cfg.workload.seed = seed;
                        c.cfg.workload.txn_count = a.txns;
                        if (stretch < 1)
                        {
                            throw ConfigError("sweep: stretch must be at least 1");
                        }
                        c.cfg.stretch = stretch;
                        cells.push_back(std::move(c));
                    }
                }
            }
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
        {
            try
            {
                const RunOutcome r = execute(cells[i].cfg);
                cells[i].row = sweep_row(cells[i], r);
                cells[i].passed = all_passed(r.verdicts);
            }
            catch (const std::exception &e)
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (first_error.empty())
                {
                    first_error = e.what();
                }
                cells[i].passed = false;
                cells[i].row = std::string(to_string(cells[i].cfg.scheduler.algorithm)) + ",error";
            }
        }
    };
    const unsigned jobs = std::max(1u, a.jobs != 0 ? a.jobs : std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(jobs, cells.size()); ++t)
    {
        pool.emplace_back(work);
    }
    work();
    for (auto &t : pool)
    {
        t.join();
    }

    std::ofstream file;
    if (!a.out_file.empty())
    {
        file = open_out(a.out_file);
    }
    std::ostream &csv = a.out_file.empty() ? out : file;
    csv << "# " << kRatioNote << '\n';
    csv << "algorithm,topology,shards,k,stretch,seed,generated,committed,aborted,makespan,mean_latency,p99_latency,max_ratio,mean_ratio,snapshots,"
           "verdicts,trace_hash\n";
    bool ok = true;
    for (const Cell &c : cells)
    {
        csv << c.row << '\n';
        ok = ok && c.passed;
    }
    if (!first_error.empty())
    {
        err << "sweep: " << first_error << '\n';
    }
    return ok ? 0 : 1;
}

} // namespace

int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Discrete-event simulator for sharded transaction schedulers"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto *run = app.add_subcommand("run", "simulate one configuration and write CSV, JSON and the trace hash");
    run->add_option("-c,--config", run_args.config, "INI configuration file")->required();
    run->add_option("--seed", run_args.seed, "workload seed (overrides the file and SHARDSIM_SEED)");
    run->add_option("-o,--out", run_args.out_dir, "output directory (overrides output.dir)");
    run->add_flag("--trace", run_args.trace, "also write trace.txt");

    TopologyArgs topo;
    bool dump = false;
    auto *vc = app.add_subcommand("verify-cover", "build the cluster hierarchy and check its properties");
    vc->add_option("-c,--config", topo.config, "take the topology from an INI file");
    vc->add_option("--topology", topo.kind, "clique, line, grid or random");
    vc->add_option("--shards", topo.shards);
    vc->add_option("--rows", topo.rows);
    vc->add_option("--cols", topo.cols);
    vc->add_option("--weight", topo.weight);
    vc->add_option("--seed", topo.seed, "random metric seed");
    vc->add_option("--c-diam", topo.c_diam);
    vc->add_option("--c-sub", topo.c_sub);
    vc->add_flag("--dump", dump, "print every cluster");

    OracleArgs oracle;
    auto *oc = app.add_subcommand("oracle-compare", "greedy coloring against the exact chromatic number");
    oc->add_option("--instances", oracle.instances, "random conflict graphs to draw");
    oc->add_option("--max-vertices", oracle.max_vertices);
    oc->add_option("--shards", oracle.shards);
    oc->add_option("--k", oracle.k, "max destinations per transaction");
    oc->add_option("--seed", oracle.seed);
    oc->add_option("--edge-list", oracle.edge_lists, "reduction instance, one 'u v' edge per line")->check(CLI::ExistingFile);
    oc->add_option("-o,--out", oracle.out_file, "CSV file (default stdout)");

    SweepArgs sweep;
    auto *sw = app.add_subcommand("sweep", "grid over scheduler, shard count, k and stretch; one CSV row per cell");
    sw->add_option("-c,--config", sweep.config, "base configuration");
    sw->add_option("--topology", sweep.topology);
    sw->add_option("--algorithms", sweep.algorithms)->delimiter(',');
    sw->add_option("--shards", sweep.shards)->delimiter(',');
    sw->add_option("--k", sweep.ks)->delimiter(',');
    sw->add_option("--stretch", sweep.stretches)->delimiter(',');
    sw->add_option("--seeds", sweep.seeds)->delimiter(',');
    sw->add_option("--txns", sweep.txns);
    sw->add_option("-j,--jobs", sweep.jobs, "parallel runs (default: hardware threads)");
    sw->add_option("-o,--out", sweep.out_file, "CSV file (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*run)
        {
            return cmd_run(run_args, out);
        }
        if (*vc)
        {
            return cmd_verify_cover(topo, dump, out);
        }
        if (*oc)
        {
            return cmd_oracle_compare(oracle, out, err);
        }
        return cmd_sweep(sweep, out, err);
    }
    catch (const ConfigError &e)
    {
        err << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const UsageError &e)
    {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace shardsim

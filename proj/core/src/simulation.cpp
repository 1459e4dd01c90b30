#include "protocol.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace shardsched
{

std::string_view to_string(Algorithm a)
{
    switch (a)
    {
    case Algorithm::A1:
        return "a1";
    case Algorithm::A2:
        return "a2";
    case Algorithm::A3:
        return "a3";
    case Algorithm::A4:
        return "a4";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "a1")
    {
        return Algorithm::A1;
    }
    if (name == "a2")
    {
        return Algorithm::A2;
    }
    if (name == "a3")
    {
        return Algorithm::A3;
    }
    if (name == "a4")
    {
        return Algorithm::A4;
    }
    throw ConfigError("unknown scheduler '" + std::string(name) + "' (expected a1, a2, a3 or a4)");
}

KeyOrder key_order(const SchedulerConfig &cfg)
{
    if (cfg.order)
    {
        return *cfg.order;
    }
    return is_multi_leader(cfg.algorithm) ? KeyOrder::TimestampMajor : KeyOrder::ColorMajor;
}

std::uint32_t stateful_lambda(std::int64_t stretch, Length diameter)
{
    return static_cast<std::uint32_t>(std::max<std::int64_t>(1, stretch * diameter));
}

namespace detail
{

void World::decide(TxnId id, ShardId leader, bool commit, bool final_now)
{
    TxnRecord &r = record(id);
    r.decided = now();
    r.committed = commit;
    if (!commit)
    {
        r.txn.status = TxnStatus::Aborted;
    }
    else
    {
        r.txn.status = is_stateful(cfg.algorithm) ? TxnStatus::Precommitted : TxnStatus::Committed;
    }
    if (final_now)
    {
        r.finalized = now();
    }
    engine.send(leader, r.txn.home, msg::Outcome{id, commit});
}

void World::resolve(TxnId id)
{
    TxnRecord &r = record(id);
    ++r.destinations_resolved;
    if (r.destinations_resolved > r.txn.accesses.size())
    {
        throw ProtocolViolation("transaction " + std::to_string(id.value) + " resolved more often than it has destinations");
    }
    if (r.destinations_resolved == r.txn.accesses.size() && !r.is_finalized())
    {
        r.finalized = now();
        if (r.committed.value_or(false))
        {
            r.txn.status = TxnStatus::Committed;
        }
        engine.note(r.txn.home, "finalize", "txn=" + std::to_string(id.value) + (r.committed.value_or(false) ? " committed" : " aborted"));
    }
}

} // namespace detail

namespace
{

class Driver
{
public:
    Driver(const ShardGraph &g, const CoverHierarchy *cover, Workload &workload, const SimulationOptions &opts, RunTrace &trace)
        : g_(g), cover_(cover), workload_(workload), opts_(opts), trace_(trace), engine_(g, opts.delays, trace),
          world_{engine_, trace, g, opts_.scheduler, key_order(opts_.scheduler), workload.accounts(), {}, {}, opts.delays.stretch},
          retry_(g.size())
    {
        const Algorithm alg = opts_.scheduler.algorithm;
        if (is_multi_leader(alg))
        {
            for (const Cluster &c : cover_->clusters())
            {
                world_.clusters.push_back(detail::LeaderView{c.id, c.height, c.leader, c.members, c.strong_diameter});
            }
        }
        else
        {
            if (!g.contains(opts_.scheduler.leader))
            {
                throw ConfigError("scheduler: leader shard out of range");
            }
            std::vector<ShardId> all;
            for (std::uint32_t s = 0; s < g.size(); ++s)
            {
                all.push_back(ShardId{s});
            }
            world_.clusters.push_back(detail::LeaderView{ClusterId{0}, Height{0, 0}, opts_.scheduler.leader, all, g.diameter()});
        }
        const AccountUniverse &acc = world_.accounts;
        if (acc.shards != g.size())
        {
            throw ConfigError("workload account universe does not match the shard count");
        }
        world_.balances.assign(g.size(), std::vector<std::int64_t>(acc.per_shard, acc.initial_balance));
        trace_.algorithm = std::string(to_string(alg));
        trace_.stateful = is_stateful(alg);
        trace_.chains.assign(g.size(), {});
        protocol_ = is_stateful(alg) ? detail::make_stateful(world_, cover_) : detail::make_stateless(world_);
        if (opts_.drop)
        {
            engine_.set_drop_filter(opts_.drop);
        }
    }

    void run()
    {
        for (auto [home, at] : workload_.initial())
        {
            engine_.post_at(home, at, msg::Generate{home});
        }
        engine_.run([this](const Envelope &env) { dispatch(env); }, opts_.horizon);
    }

private:
    void dispatch(const Envelope &env)
    {
        if (const auto *m = std::get_if<msg::Generate>(&env.payload))
        {
            generate(m->home);
        }
        else if (const auto *m = std::get_if<msg::SubmitTxn>(&env.payload))
        {
            world_.record(m->txn).submitted = engine_.now();
            protocol_->on_submit(m->cluster, m->txn);
        }
        else if (const auto *m = std::get_if<msg::Outcome>(&env.payload))
        {
            outcome(env.dst, *m);
        }
        else
        {
            protocol_->handle(env);
        }
    }

    void generate(ShardId home)
    {
        const TxnId id{trace_.txns.size()};
        std::optional<Transaction> t;
        std::optional<TxnId> retry_of;
        if (!retry_[home.value].empty())
        {
            const Transaction &orig = world_.txn(retry_[home.value].front());
            retry_of = orig.id;
            retry_[home.value].pop_front();
            t = Transaction{id, engine_.now(), home, orig.accesses, TxnStatus::Pending};
        }
        else
        {
            t = workload_.generate(home, engine_.now(), id);
        }
        if (!t)
        {
            return;
        }
        if (busy_homes_.count(home.value) != 0)
        {
            throw ProtocolViolation("home " + std::to_string(home.value) + " generated a second live transaction");
        }
        busy_homes_.insert(home.value);
        t->ts = engine_.now();
        t->status = TxnStatus::Pending;

        TxnRecord rec;
        rec.generated = engine_.now();
        rec.retry_of = retry_of;
        const detail::LeaderView *view = &world_.clusters.front();
        if (is_multi_leader(opts_.scheduler.algorithm))
        {
            const Cluster &c = cover_->home_cluster(g_, home, t->destinations());
            view = &world_.cluster(c.id);
        }
        rec.cluster = view->id;
        rec.height = view->height;
        rec.txn = std::move(*t);
        trace_.txns.push_back(std::move(rec));
        engine_.send(home, view->leader, msg::SubmitTxn{id, view->id});
    }

    void outcome(ShardId home, const msg::Outcome &m)
    {
        TxnRecord &r = world_.record(m.txn);
        r.outcome = engine_.now();
        busy_homes_.erase(home.value);
        if (!m.committed && opts_.scheduler.retry)
        {
            retry_[home.value].push_back(m.txn);
            engine_.post(home, msg::Generate{home});
            return;
        }
        if (auto next = workload_.next_release(home, engine_.now()))
        {
            engine_.post_at(home, *next, msg::Generate{home});
        }
    }

    const ShardGraph &g_;
    const CoverHierarchy *cover_;
    Workload &workload_;
    const SimulationOptions &opts_;
    RunTrace &trace_;
    Engine engine_;
    detail::World world_;
    std::unique_ptr<detail::Protocol> protocol_;
    std::vector<std::deque<TxnId>> retry_;
    std::set<std::uint32_t> busy_homes_;
};

} // namespace

RunTrace simulate(const ShardGraph &g, const CoverHierarchy *cover, Workload &workload, const SimulationOptions &options)
{
    std::optional<CoverHierarchy> owned;
    if (is_multi_leader(options.scheduler.algorithm) && cover == nullptr)
    {
        owned = build_hierarchy(g);
        cover = &*owned;
    }
    RunTrace trace;
    Driver driver(g, cover, workload, options, trace);
    driver.run();
    return trace;
}

} // namespace shardsched

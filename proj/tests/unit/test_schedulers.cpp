#include "shardsched/config.hpp"
#include "shardsched/harness.hpp"
#include "shardsched/messages.hpp"
#include "shardsched/metrics.hpp"

#include "sim_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace shardsched;
using testsupport::scripted;
using testsupport::ScriptRun;

namespace
{

bool has_record(const RunTrace &trace, const std::string &kind)
{
    return std::any_of(trace.records.begin(), trace.records.end(), [&](const TraceRecord &r) { return r.kind == kind; });
}

RunTrace random_run(Algorithm a, const TopologySpec &topo, std::int64_t stretch, std::uint32_t k, std::uint64_t seed, std::uint64_t txns = 200)
{
    const ShardGraph g = build_graph(topo);
    WorkloadSpec w;
    w.k_max = k;
    w.txn_count = txns;
    w.seed = seed;
    RandomWorkload wl(g, w);
    SimulationOptions o;
    o.scheduler.algorithm = a;
    o.delays = stretch == 1 ? DelayModel::synchronous() : DelayModel::partial(stretch, derive_seed(seed, 0xde1a));
    return simulate(g, nullptr, wl, o);
}

std::map<std::string, std::string> golden_hashes()
{
    std::map<std::string, std::string> out;
    std::ifstream in(std::string(SHARDSCHED_GOLDEN_DIR) + "/hashes.txt");
    std::string name, hash;
    while (in >> name >> hash)
    {
        out[name] = hash;
    }
    return out;
}

} // namespace

TEST(Algorithms, NamesRoundTrip)
{
    for (Algorithm a : {Algorithm::A1, Algorithm::A2, Algorithm::A3, Algorithm::A4})
    {
        EXPECT_EQ(parse_algorithm(to_string(a)), a);
    }
    EXPECT_THROW(parse_algorithm("a5"), ConfigError);
    SchedulerConfig c;
    c.algorithm = Algorithm::A2;
    EXPECT_EQ(key_order(c), KeyOrder::TimestampMajor);
    c.algorithm = Algorithm::A3;
    EXPECT_EQ(key_order(c), KeyOrder::ColorMajor);
    c.order = KeyOrder::TimestampMajor;
    EXPECT_EQ(key_order(c), KeyOrder::TimestampMajor);
    EXPECT_EQ(stateful_lambda(1, 0), 1u);
    EXPECT_EQ(stateful_lambda(3, 4), 12u);
}

TEST(Keys, OrderingTuples)
{
    const PriorityKey a = make_key(KeyOrder::ColorMajor, 9, Height{0, 0}, 1, TxnId{5});
    const PriorityKey b = make_key(KeyOrder::ColorMajor, 2, Height{0, 0}, 2, TxnId{1});
    EXPECT_LT(a, b); // color first
    const PriorityKey c = make_key(KeyOrder::TimestampMajor, 2, Height{3, 0}, 7, TxnId{5});
    const PriorityKey d = make_key(KeyOrder::TimestampMajor, 3, Height{0, 0}, 0, TxnId{1});
    EXPECT_LT(c, d); // timestamp first
    const PriorityKey e = make_key(KeyOrder::TimestampMajor, 3, Height{0, 1}, 0, TxnId{1});
    EXPECT_LT(d, e); // then height
}

TEST(Stateless, SingleTransactionCommitsAfterFourHops)
{
    const ShardGraph g = build_graph(topology::Clique{3, 1});
    ScriptRun run(g, Algorithm::A1);
    const RunTrace trace = run(g, {scripted(run.accounts, 1, 0, {2})});
    ASSERT_EQ(trace.txns.size(), 1u);
    const TxnRecord &r = trace.txns[0];
    EXPECT_EQ(r.submitted, 1);
    EXPECT_EQ(r.finalized, 4);
    EXPECT_EQ(r.outcome, 4); // sent at the decision, lands with the confirm
    EXPECT_TRUE(r.committed.value_or(false));
    ASSERT_EQ(trace.chains[2].size(), 1u);
    EXPECT_EQ(trace.chains[2][0].txns, std::vector<TxnId>{TxnId{0}});
    EXPECT_TRUE(trace.chains[0].empty());
    EXPECT_TRUE(trace.quiescent);
}

TEST(Stateless, LocalTransactionAtTheLeader)
{
    const ShardGraph g = build_graph(topology::Clique{2, 1});
    ScriptRun run(g, Algorithm::A1);
    const RunTrace trace = run(g, {scripted(run.accounts, 0, 0, {0})});
    EXPECT_TRUE(trace.txns[0].committed.value_or(false));
    EXPECT_LE(trace.txns[0].finalized, 3);
}

TEST(Stateless, OlderLateArrivalCancelsYoungerColoring)
{
    // Line of 6 with the leader at S0. The younger transaction from S1 reaches
    // the leader first; its subtransaction is still travelling to S4 when the
    // older one from S5 arrives, so the younger coloring is cancelled.
    const ShardGraph g = build_graph(topology::Line{6, 1});
    ScriptRun run(g, Algorithm::A1);
    const RunTrace trace = run(g, {scripted(run.accounts, 5, 0, {4}), scripted(run.accounts, 1, 1, {4})});
    EXPECT_TRUE(has_record(trace, "cancel-color"));
    EXPECT_TRUE(verify_safety(trace).passed);
    EXPECT_TRUE(verify_liveness(trace).passed);
    EXPECT_TRUE(verify_destination_order(trace).passed);
    // The older transaction lands first on the shared shard.
    ASSERT_EQ(trace.chains[4].size(), 2u);
    const TxnId older = trace.txns[0].txn.ts < trace.txns[1].txn.ts ? trace.txns[0].txn.id : trace.txns[1].txn.id;
    EXPECT_EQ(trace.chains[4][0].txns.front(), older);
}

TEST(Stateless, GuardedWithdrawalAborts)
{
    const ShardGraph g = build_graph(topology::Clique{3, 1});
    ScriptRun run(g, Algorithm::A1);
    ScriptedTxn t{ShardId{1}, 0, {}};
    ShardAccess a;
    a.shard = ShardId{2};
    a.writes.push_back(WriteOp{run.accounts.account(ShardId{2}, 0), -1000, true});
    t.accesses.push_back(a);
    ShardAccess b = testsupport::touch(run.accounts, 1);
    b.writes[0].delta = 1000;
    t.accesses.push_back(b);
    const RunTrace trace = run(g, {t});
    ASSERT_EQ(trace.txns.size(), 1u);
    EXPECT_FALSE(trace.txns[0].committed.value_or(true));
    EXPECT_TRUE(trace.txns[0].is_finalized());
    EXPECT_TRUE(verify_safety(trace).passed);
    for (const auto &chain : trace.chains)
    {
        EXPECT_TRUE(chain.empty());
    }
}

TEST(Stateless, IgnoreProtocolIsExercisedUnderContention)
{
    std::uint64_t ignores = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const RunTrace t = random_run(Algorithm::A1, topology::Clique{8, 1}, 1, 3, seed);
        auto it = t.messages_by_kind.find("ignore");
        ignores += it == t.messages_by_kind.end() ? 0 : it->second;
        EXPECT_TRUE(verify_safety(t).passed);
        EXPECT_TRUE(verify_liveness(t).passed);
    }
    EXPECT_GT(ignores, 0u);
}

TEST(Stateless, MultiLeaderOrderingAndSafety)
{
    for (std::int64_t stretch : {1, 3})
    {
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
        {
            const RunTrace t = random_run(Algorithm::A2, topology::Line{8, 1}, stretch, 3, seed);
            for (const Verdict &v : standard_verdicts(t, Algorithm::A2, ConflictMode::Shard, nullptr))
            {
                EXPECT_TRUE(v.passed) << v;
            }
        }
    }
}

TEST(Stateful, SingleTransactionPrecommitsAndApplies)
{
    const ShardGraph g = build_graph(topology::Clique{3, 1});
    ScriptRun run(g, Algorithm::A3);
    const RunTrace trace = run(g, {scripted(run.accounts, 1, 0, {2})});
    ASSERT_EQ(trace.txns.size(), 1u);
    EXPECT_TRUE(trace.txns[0].committed.value_or(false));
    EXPECT_TRUE(trace.stateful);
    ASSERT_EQ(trace.chains[2].size(), 1u);
    EXPECT_FALSE(trace.rounds.empty());
    EXPECT_TRUE(verify_cadence(trace).passed);
    EXPECT_TRUE(verify_liveness(trace).passed);
}

TEST(Stateful, LambdaOneProcessesOneColorPerRound)
{
    const ShardGraph g = build_graph(topology::Clique{6, 1});
    ScriptRun run(g, Algorithm::A3);
    run.options.scheduler.lambda = 1;
    std::vector<ScriptedTxn> txns;
    for (std::uint32_t h = 1; h < 6; ++h)
    {
        txns.push_back(scripted(run.accounts, h, 0, {0}));
    }
    const RunTrace trace = run(g, txns);
    ASSERT_FALSE(trace.rounds.empty());
    std::uint32_t total = 0;
    for (const RoundRecord &r : trace.rounds)
    {
        EXPECT_LE(r.colors, 1u);
        EXPECT_EQ(r.lambda, 1u);
        total += r.colors;
    }
    EXPECT_EQ(total, 5u);
    EXPECT_TRUE(verify_cadence(trace).passed);
    EXPECT_TRUE(verify_safety(trace).passed);
}

TEST(Stateful, CadenceHoldsOnRandomRuns)
{
    for (std::int64_t stretch : {1, 3})
    {
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
        {
            const RunTrace t = random_run(Algorithm::A3, topology::Line{8, 1}, stretch, 3, seed);
            const Verdict v = verify_cadence(t);
            EXPECT_TRUE(v.passed) << v;
            for (const auto &[c, lambda] : t.lambda)
            {
                EXPECT_EQ(lambda, stateful_lambda(stretch, 7));
            }
        }
    }
}

TEST(Stateful, CadenceCheckerCatchesALateTrigger)
{
    RunTrace t;
    t.stateful = true;
    t.lambda[ClusterId{0}] = 1;
    t.triggers.push_back(TriggerRecord{ClusterId{0}, 0, false, true});
    t.triggers.push_back(TriggerRecord{ClusterId{0}, 9, false, true});
    EXPECT_FALSE(verify_cadence(t).passed);
    t.triggers[1].time = 4;
    EXPECT_TRUE(verify_cadence(t).passed);
    t.rounds.push_back(RoundRecord{ClusterId{0}, 0, 2, 2, 1});
    EXPECT_FALSE(verify_cadence(t).passed);
}

TEST(Stateful, PartialSynchronyKeepsBatchOrder)
{
    for (Algorithm a : {Algorithm::A3, Algorithm::A4})
    {
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
        {
            const RunTrace t = random_run(a, topology::Clique{8, 1}, 3, 3, seed);
            const Verdict order = verify_destination_order(t);
            EXPECT_TRUE(order.passed) << order;
            EXPECT_TRUE(verify_safety(t).passed);
            EXPECT_TRUE(verify_liveness(t).passed);
        }
    }
}

TEST(Stateful, MultiLeaderHasASingleHolderAtATime)
{
    const ShardGraph g = build_graph(topology::Line{8, 1});
    const CoverHierarchy h = build_hierarchy(g);
    for (std::int64_t stretch : {1, 3})
    {
        for (std::uint64_t seed = 1; seed <= 4; ++seed)
        {
            WorkloadSpec w;
            w.k_max = 3;
            w.seed = seed;
            RandomWorkload wl(g, w);
            SimulationOptions o;
            o.scheduler.algorithm = Algorithm::A4;
            o.delays = stretch == 1 ? DelayModel::synchronous() : DelayModel::partial(stretch, seed);
            const RunTrace t = simulate(g, &h, wl, o);
            for (const Verdict &v : standard_verdicts(t, Algorithm::A4, ConflictMode::Shard, &h))
            {
                EXPECT_TRUE(v.passed) << v;
            }
        }
    }
}

TEST(Stateful, SingleHolderCheckerCatchesOverlap)
{
    const ShardGraph g = build_graph(topology::Line{4, 1});
    const CoverHierarchy h = build_hierarchy(g);
    // Find two clusters that share a shard.
    std::optional<std::pair<ClusterId, ClusterId>> pair;
    for (const Cluster &a : h.clusters())
    {
        for (const Cluster &b : h.clusters())
        {
            if (a.id < b.id && a.contains(b.members.front()))
            {
                pair = std::make_pair(a.id, b.id);
            }
        }
    }
    ASSERT_TRUE(pair);
    RunTrace t;
    t.control.push_back(ControlRecord{1, pair->first, true});
    t.control.push_back(ControlRecord{2, pair->second, true});
    EXPECT_FALSE(verify_single_holder(t, h).passed);
    t.control.insert(t.control.begin() + 1, ControlRecord{2, pair->first, false});
    EXPECT_TRUE(verify_single_holder(t, h).passed);
}

TEST(Determinism, SameInputsSameHash)
{
    for (Algorithm a : {Algorithm::A1, Algorithm::A2, Algorithm::A3, Algorithm::A4})
    {
        const RunTrace x = random_run(a, topology::Line{8, 1}, 3, 3, 5, 100);
        const RunTrace y = random_run(a, topology::Line{8, 1}, 3, 3, 5, 100);
        EXPECT_EQ(x.hash(), y.hash()) << to_string(a);
        const RunTrace z = random_run(a, topology::Line{8, 1}, 3, 3, 6, 100);
        EXPECT_NE(x.hash(), z.hash()) << to_string(a);
    }
}

TEST(Determinism, CanonicalConfigsMatchGoldenHashes)
{
    const auto golden = golden_hashes();
    ASSERT_EQ(golden.size(), 4u);
    for (const auto &[name, hash] : golden)
    {
        const RunConfig cfg = load_config(std::string(SHARDSCHED_GOLDEN_DIR) + "/" + name + ".cfg");
        const RunOutcome out = execute(cfg);
        EXPECT_EQ(hex_hash(out.trace.hash()), hash) << name;
        EXPECT_TRUE(all_passed(out.verdicts)) << name;
    }
}

TEST(Retry, AbortedTransactionsComeBackAsClones)
{
    // The withdrawal lacks funds until the deposit from S0 lands.
    const ShardGraph g = build_graph(topology::Clique{3, 1});
    ScriptRun run(g, Algorithm::A1);
    run.options.scheduler.retry = true;
    run.options.horizon = 10'000;
    const AccountId acct = run.accounts.account(ShardId{2}, 0);
    ScriptedTxn withdraw{ShardId{1}, 0, {ShardAccess{ShardId{2}, {}, {WriteOp{acct, -150, true}}}}};
    ScriptedTxn deposit{ShardId{0}, 6, {ShardAccess{ShardId{2}, {}, {WriteOp{acct, 100, false}}}}};
    const RunTrace trace = run(g, {withdraw, deposit});
    EXPECT_FALSE(trace.txns[0].committed.value_or(true));
    bool retried_commit = false;
    for (const auto &r : trace.txns)
    {
        retried_commit = retried_commit || (r.retry_of && r.committed.value_or(false));
    }
    EXPECT_TRUE(retried_commit);
    EXPECT_TRUE(verify_liveness(trace).passed);
    EXPECT_TRUE(verify_safety(trace).passed);
}

#include "shardsched/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace shardsched;

namespace
{

RunConfig parse(const std::string &text)
{
    std::istringstream in(text);
    return parse_config(in);
}

// Restores SHARDSIM_SEED on scope exit.
class SeedEnv
{
public:
    explicit SeedEnv(const char *value)
    {
        if (const char *old = std::getenv(kSeedEnv))
        {
            old_ = old;
        }
        if (value)
        {
            ::setenv(kSeedEnv, value, 1);
        }
        else
        {
            ::unsetenv(kSeedEnv);
        }
    }
    ~SeedEnv()
    {
        if (old_)
        {
            ::setenv(kSeedEnv, old_->c_str(), 1);
        }
        else
        {
            ::unsetenv(kSeedEnv);
        }
    }

private:
    std::optional<std::string> old_;
};

} // namespace

TEST(Config, ParsesEverySection)
{
    SeedEnv env(nullptr);
    const RunConfig c = parse(R"(
[topology]
kind = line
shards = 9
weight = 2
c_diam = 5
c_sub = 3

[workload]
k_max = 3
d_max = 4
write_prob = 0.25
skew = zipf
zipf_alpha = 1.5
txn_count = 77
horizon = 500
seed = 12
accounts_per_shard = 8
initial_balance = 40
max_amount = 9

[scheduler]
algorithm = a3
leader = 4
lambda = 2
retry = true
order = timestamp
conflict = account
max_time = 9999

[delay]
mode = partial
stretch = 3

[output]
dir = /tmp/x
)");
    const auto *line = std::get_if<topology::Line>(&c.topology);
    ASSERT_NE(line, nullptr);
    EXPECT_EQ(line->shards, 9u);
    EXPECT_EQ(line->weight, 2);
    EXPECT_DOUBLE_EQ(c.cover.c_diam, 5.0);
    EXPECT_DOUBLE_EQ(c.cover.c_sub, 3.0);
    EXPECT_EQ(c.workload.k_max, 3u);
    EXPECT_EQ(c.workload.d_max, 4);
    EXPECT_DOUBLE_EQ(c.workload.write_prob, 0.25);
    EXPECT_EQ(c.workload.skew, Skew::Zipf);
    EXPECT_EQ(c.workload.txn_count, 77u);
    EXPECT_EQ(c.workload.horizon, 500);
    EXPECT_EQ(c.workload.seed, 12u);
    EXPECT_EQ(c.workload.accounts_per_shard, 8u);
    EXPECT_EQ(c.workload.initial_balance, 40);
    EXPECT_EQ(c.workload.max_amount, 9);
    EXPECT_EQ(c.scheduler.algorithm, Algorithm::A3);
    EXPECT_EQ(c.scheduler.leader, ShardId{4});
    EXPECT_EQ(c.scheduler.lambda, 2u);
    EXPECT_TRUE(c.scheduler.retry);
    EXPECT_EQ(c.scheduler.order, KeyOrder::TimestampMajor);
    EXPECT_EQ(c.scheduler.conflict, ConflictMode::Account);
    EXPECT_EQ(c.max_time, 9999);
    EXPECT_EQ(c.stretch, 3);
    EXPECT_EQ(c.output_dir, "/tmp/x");
    EXPECT_FALSE(c.delays().is_synchronous());
}

TEST(Config, DefaultsFromAnEmptyFile)
{
    SeedEnv env(nullptr);
    const RunConfig c = parse("");
    EXPECT_TRUE(std::holds_alternative<topology::Clique>(c.topology));
    EXPECT_EQ(c.stretch, 1);
    EXPECT_TRUE(c.delays().is_synchronous());
    EXPECT_EQ(c.workload.seed, WorkloadSpec{}.seed);
}

TEST(Config, GridAndRandomTopologies)
{
    const RunConfig g = parse("[topology]\nkind = grid\nrows = 3\ncols = 4\n");
    const auto *grid = std::get_if<topology::Grid>(&g.topology);
    ASSERT_NE(grid, nullptr);
    EXPECT_EQ(grid->rows * grid->cols, 12u);
    EXPECT_THROW(parse("[topology]\nkind = grid\n"), ConfigError);

    const RunConfig r = parse("[topology]\nkind = random\nshards = 10\nseed = 3\n");
    const auto *rm = std::get_if<topology::RandomMetric>(&r.topology);
    ASSERT_NE(rm, nullptr);
    EXPECT_EQ(rm->seed, 3u);
}

TEST(Config, RejectsUnknownsAndBadValues)
{
    EXPECT_THROW(parse("[topology]\ncolour = red\n"), ConfigError);
    EXPECT_THROW(parse("[network]\nkind = x\n"), ConfigError);
    EXPECT_THROW(parse("kind = clique\n"), ConfigError);
    EXPECT_THROW(parse("[topology]\nkind = torus\n"), ConfigError);
    EXPECT_THROW(parse("[topology]\nshards = -3\n"), ConfigError);
    EXPECT_THROW(parse("[topology]\nshards = 0\n"), ConfigError);
    EXPECT_THROW(parse("[workload]\nwrite_prob = 2\n"), ConfigError);
    EXPECT_THROW(parse("[workload]\nk_max = two\n"), ConfigError);
    EXPECT_THROW(parse("[workload]\nskew = pareto\n"), ConfigError);
    EXPECT_THROW(parse("[scheduler]\nalgorithm = a9\n"), ConfigError);
    EXPECT_THROW(parse("[scheduler]\nretry = maybe\n"), ConfigError);
    EXPECT_THROW(parse("[scheduler]\norder = random\n"), ConfigError);
    EXPECT_THROW(parse("[delay]\nmode = async\n"), ConfigError);
    EXPECT_THROW(parse("[delay]\nmode = sync\nstretch = 3\n"), ConfigError);
    EXPECT_THROW(parse("[topology\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST(Config, SeedPrecedence)
{
    {
        SeedEnv env("31");
        EXPECT_EQ(parse("").workload.seed, 31u);
        EXPECT_EQ(parse("[workload]\nseed = 5\n").workload.seed, 5u);
    }
    {
        SeedEnv env("not-a-number");
        EXPECT_THROW(parse(""), ConfigError);
    }
}

TEST(Config, WriteThenParseRoundTrips)
{
    SeedEnv env(nullptr);
    RunConfig c;
    c.topology = topology::Grid{2, 5, 3};
    c.workload.k_max = 4;
    c.workload.horizon = 123;
    c.workload.seed = 77;
    c.scheduler.algorithm = Algorithm::A4;
    c.scheduler.lambda = 6;
    c.stretch = 2;
    c.output_dir = "out";
    std::ostringstream os;
    write_config(os, c);
    const RunConfig back = parse(os.str());
    EXPECT_EQ(config_entries(back), config_entries(c));
}

#include <gtest/gtest.h>

#include <cmath>
#include <array>
#include <cstring>
#include <random>

#include "lobsim/episode_env.hpp"
#include "lobsim/exec_engine.hpp"
#include "lobsim/pnl.hpp"
#include "lobsim/synthetic.hpp"
#include "../support.hpp"

namespace lobsim {
namespace {

EngineParams frictionless() { return {{0.0, 0.0}, {0.0, 0.5, 60.0}}; }

std::shared_ptr<const DayBook> synth_day(std::size_t n = 4000, std::uint64_t seed = 5) {
    synthetic::MarketParams p;
    p.snapshots = n;
    return std::make_shared<DayBook>(synthetic::generate_day(Date(20200203), p, seed));
}

EpisodeConfig cfg_for(std::shared_ptr<const DayBook> day, std::size_t start, int h) {
    EpisodeConfig c;
    c.day = std::move(day);
    c.start_index = start;
    c.horizon_s = h;
    return c;
}

TEST(Episode, ResetState) {
    Environment env(EngineParams{});
    const auto day = synth_day();
    const Observation a = env.reset(cfg_for(day, 10, 600));
    EXPECT_EQ(a[obs::kInventory], 1.0);
    EXPECT_EQ(a[obs::kTimeToGo], 1.0);
    EXPECT_EQ(a[obs::kIndicators + 7], 0.0);  // OFI on the first snapshot
    EXPECT_EQ(a[obs::kDeltaMid], 0.0);
    Environment other(EngineParams{});
    const Observation b = other.reset(cfg_for(day, 10, 600));
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(a)), 0);
    EXPECT_EQ(env.portfolio().inventory, 1.0);
    EXPECT_EQ(env.portfolio().cash, 0.0);
    EXPECT_EQ(env.impact().displacement, 0.0);
}

TEST(Episode, ResetRejectsBadConfig) {
    Environment env(EngineParams{});
    const auto day = synth_day(100);
    EXPECT_THROW(env.reset(cfg_for(day, 50, 60)), std::out_of_range);
    EpisodeConfig c = cfg_for(day, 0, 60);
    c.trade_fraction = 0.0;
    EXPECT_THROW(env.reset(c), std::invalid_argument);
    c = cfg_for(day, 0, 60);
    c.target_fraction = 1.0;
    EXPECT_THROW(env.reset(c), std::invalid_argument);
    c = cfg_for(nullptr, 0, 60);
    EXPECT_THROW(env.reset(c), std::invalid_argument);
    EXPECT_THROW(env.step(0.1), std::logic_error);
}

TEST(Episode, LastFeasibleStartRunsExactlyHorizonSteps) {
    const auto day = synth_day(1000);
    for (int h : {1, 60, 999, 1000}) {
        const auto last = last_feasible_start(*day, h);
        ASSERT_TRUE(last.has_value());
        EXPECT_EQ(*last, 1000u - static_cast<std::size_t>(h));
        EXPECT_FALSE(window_fits(*day, *last + 1, h));
        Environment env(EngineParams{});
        env.reset(cfg_for(day, *last, h));
        std::size_t steps = 0;
        while (env.active()) {
            const StepResult r = env.step(0.05);
            ++steps;
            EXPECT_EQ(r.done, !env.active());
        }
        EXPECT_EQ(steps, static_cast<std::size_t>(h));
        EXPECT_THROW(env.step(0.0), std::logic_error);
    }
    EXPECT_FALSE(last_feasible_start(*day, 1001).has_value());
}

TEST(Episode, WindowCountsSnapshotsInInterval) {
    // Day with holes: the window covers whatever snapshots fall in [t, t + H).
    auto day = std::make_shared<DayBook>(*synth_day(300));
    std::vector<Snapshot> kept;
    for (std::size_t i = 0; i < day->size(); ++i) {
        if (i % 7 != 3) kept.push_back(day->snapshots[i]);
    }
    day->snapshots = kept;
    const std::int64_t t0 = (*day)[5].timestamp_ns;
    std::size_t expected = 0;
    for (const auto& s : day->snapshots) {
        if (s.timestamp_ns >= t0 && s.timestamp_ns < t0 + 100 * kNanosPerSecond) ++expected;
    }
    const EpisodeWindow w = episode_window(*day, 5, 100);
    EXPECT_EQ(w.length(), expected);
    Environment env(EngineParams{});
    env.reset(cfg_for(day, 5, 100));
    EXPECT_EQ(env.episode_length(), expected);
}

TEST(Episode, ActionClipping) {
    const Snapshot deep = test::ladder(100.0, 0.01, 0.01, 1e9);
    const auto day = test::static_day(deep, 50);
    Environment env(frictionless());
    env.reset(cfg_for(day, 0, 50));
    StepResult r = env.step(-0.5);
    EXPECT_EQ(env.portfolio().inventory, 1.0);
    EXPECT_EQ(r.info.fill.filled_qty, 0.0);
    EXPECT_EQ(r.reward, 0.0);
    r = env.step(1.0);
    EXPECT_DOUBLE_EQ(r.info.fill.filled_qty, 0.1);
    EXPECT_DOUBLE_EQ(env.portfolio().inventory, 0.9);
    EXPECT_THROW(env.step(NAN), std::invalid_argument);
}

TEST(Episode, GeometricDecayUnderFullAggression) {
    const auto day = test::static_day(test::ladder(100.0, 0.01, 0.01, 1e9), 200);
    Environment env(frictionless());
    EpisodeConfig c = cfg_for(day, 0, 200);
    c.trade_fraction = 0.1;
    env.reset(c);
    for (int k = 1; k < 200; ++k) {
        env.step(1.0);
        ASSERT_NEAR(env.portfolio().inventory, std::pow(0.9, k), 1e-12);
    }
}

TEST(Episode, LatencyUsesNextBook) {
    // Prices rise every second, so selling at i+1 beats a fill at i.
    auto day = std::make_shared<DayBook>();
    day->date = Date(20200101);
    for (int i = 0; i < 10; ++i) {
        Snapshot s = test::ladder(100.0 + i, 0.5, 0.1, 10.0);
        s.timestamp_ns = i * kNanosPerSecond;
        day->snapshots.push_back(s);
    }
    Environment env(frictionless());
    env.reset(cfg_for(day, 0, 10));
    const StepResult r = env.step(0.1);
    ASSERT_TRUE(r.info.execution_index.has_value());
    EXPECT_EQ(*r.info.execution_index, 1u);
    EXPECT_DOUBLE_EQ(r.info.fill.avg_price, 100.5);
    EXPECT_GT(r.info.fill.avg_price, (*day)[0].best_bid());
}

TEST(Episode, StaticBookLatencyIsInvisible) {
    const Snapshot deep = test::ladder(100.0, 0.5, 0.1, 10.0);
    const auto day = test::static_day(deep, 5);
    Environment env(frictionless());
    env.reset(cfg_for(day, 0, 5));
    const StepResult r = env.step(0.1);
    const Execution direct = execute_market_sell(deep, 0.1, {}, frictionless().impact, {0.0, 0.0}, 200.0);
    EXPECT_EQ(r.info.fill.avg_price, direct.fill.avg_price);
    EXPECT_EQ(r.info.fill.filled_qty, direct.fill.filled_qty);
}

TEST(Reward, Examples) {
    const auto day = test::static_day(test::make_snapshot(0, {{100.0 - 1e-10, 1e9}}, {{100.0 + 1e-10, 1e9}}), 20);
    Environment env(frictionless(), RewardParams{0.0});
    env.reset(cfg_for(day, 0, 20));
    double total = 0.0;
    while (env.active()) total += env.step(0.0).reward;
    EXPECT_EQ(total, 0.0);

    EpisodeConfig c = cfg_for(day, 0, 20);
    Fill f;
    f.filled_qty = 0.5;
    f.gross_proceeds = 50.0;
    EXPECT_DOUBLE_EQ(compute_reward(f, 100.0, {50.0, 0.5}, false, 100.0, c, {0.01}), 0.0);
    // Terminal: residual 0.5 above target 0.2 with price up 1%.
    c.target_fraction = 0.2;
    const double r = compute_reward(Fill{}, 100.0, {0.0, 0.5}, true, 101.0, c, {0.01});
    EXPECT_NEAR(r, 0.5 * 1.0 / 100.0 - 0.01 * 0.3, 1e-15);
    // Under target: no penalty.
    EXPECT_NEAR(compute_reward(Fill{}, 100.0, {0.0, 0.1}, true, 100.0, c, {0.5}), 0.0, 1e-15);
}

TEST(Reward, SumMatchesPnlWithZeroPenalty) {
    const auto day = synth_day(8000, 21);
    std::mt19937_64 eng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const int h = std::array{60, 300, 1800}[trial % 3];
        const std::size_t start = rng::uniform_index(eng, *last_feasible_start(*day, h) + 1);
        EngineParams e;
        e.impact.coeff = rng::uniform(eng, 0.0, 0.5);
        e.fees.taker_fee = rng::uniform(eng, 0.0, 0.002);
        Environment env(e, RewardParams{0.0});
        env.reset(cfg_for(day, start, h));
        double sum = 0.0;
        double last_inv = 1.0;
        while (env.active()) {
            sum += env.step(rng::uniform(eng, -1.0, 1.0)).reward;
            EXPECT_LE(env.portfolio().inventory, last_inv);
            EXPECT_GE(env.portfolio().inventory, 0.0);
            last_inv = env.portfolio().inventory;
        }
        const EpisodeOutcome o = env.outcome();
        EXPECT_NEAR(100.0 * sum, o.pnl_percent, 1e-9);
        EXPECT_EQ(o.cumulative_reward, sum);
        EXPECT_EQ(o.steps, env.episode_length());
    }
}

TEST(Episode, DeterministicTrajectory) {
    const auto day = synth_day(3000, 8);
    auto run = [&] {
        Environment env(EngineParams{});
        std::vector<double> trace;
        Observation o = env.reset(cfg_for(day, 123, 900));
        trace.insert(trace.end(), o.begin(), o.end());
        std::mt19937_64 eng(99);
        while (env.active()) {
            const StepResult r = env.step(rng::uniform(eng, -1.0, 1.0));
            trace.insert(trace.end(), r.observation.begin(), r.observation.end());
            trace.push_back(r.reward);
        }
        return trace;
    };
    const auto a = run();
    const auto b = run();
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
}

TEST(Episode, ObservationsFiniteAndBounded) {
    const auto day = synth_day(2000, 12);
    Environment env(EngineParams{});
    env.reset(cfg_for(day, 0, 1500));
    while (env.active()) {
        const StepResult r = env.step(0.1);
        for (double v : r.observation) ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(r.observation[obs::kTimeToGo], 0.0);
        ASSERT_LE(r.observation[obs::kTimeToGo], 1.0);
        ASSERT_GE(r.observation[obs::kInventory], 0.0);
        ASSERT_LE(r.observation[obs::kInventory], 1.0);
    }
    EXPECT_EQ(env.outcome().steps, 1500u);
}

TEST(Pnl, Formula) {
    EXPECT_DOUBLE_EQ(pnl_percent(99.0, 0.0, 100.0, 100.0, 1.0), -1.0);
    EXPECT_DOUBLE_EQ(pnl_percent(50.0, 0.5, 102.0, 100.0, 1.0), 1.0);
}

}  // namespace
}  // namespace lobsim

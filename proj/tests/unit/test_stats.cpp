#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "lobsim/rng.hpp"
#include "lobsim/stats.hpp"
#include "../oracles.hpp"
#include "../support.hpp"

namespace lobsim::stats {
namespace {

std::vector<double> gaussian(std::uint64_t seed, std::size_t n, double mu = 0.0) {
    std::mt19937_64 eng(seed);
    return test::normal_sample(eng, n, mu, 1.0);
}

TEST(Wilcoxon, AllPositiveThree) {
    const std::vector<double> d = {1, 2, 3};
    const auto r = wilcoxon_signed_rank(d);
    EXPECT_EQ(r.statistic, 6.0);
    EXPECT_EQ(r.p, 0.125);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(wilcoxon_signed_rank(std::vector<double>{-1, -2, -3}).p, 1.0);
}

TEST(Wilcoxon, ZerosDroppedAndDegenerate) {
    const auto r = wilcoxon_signed_rank(std::vector<double>{0, 1, 0, 2, 3});
    EXPECT_EQ(r.n_used, 3u);
    EXPECT_EQ(r.p, 0.125);
    const auto z = wilcoxon_signed_rank(std::vector<double>{0, 0, 0});
    EXPECT_TRUE(z.degenerate);
    EXPECT_EQ(z.p, 1.0);
}

TEST(Wilcoxon, MatchesEnumerationWithTies) {
    std::mt19937_64 eng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng::uniform_index(eng, 14);
        std::vector<double> d(n);
        for (auto& x : d) {
            // Coarse grid so ties and zeros occur.
            x = std::round(rng::uniform(eng, -4.0, 6.0));
        }
        const double got = wilcoxon_signed_rank(d, Alternative::greater, WilcoxonMethod::exact).p;
        const bool all_zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
        if (all_zero) continue;
        EXPECT_NEAR(got, oracle::wilcoxon_enumerate(d), 1e-12);
        const double two = wilcoxon_signed_rank(d, Alternative::two_sided, WilcoxonMethod::exact).p;
        EXPECT_NEAR(two, oracle::wilcoxon_enumerate(d, true), 1e-12);
    }
}

TEST(Wilcoxon, NegationRelation) {
    // Without ties: p(d) + p(-d) = 1 + P(W+ = w_obs).
    std::mt19937_64 eng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = test::normal_sample(eng, 3 + rng::uniform_index(eng, 10));
        std::vector<double> neg(d);
        for (auto& x : neg) x = -x;
        const double p = wilcoxon_signed_rank(d).p;
        const double q = wilcoxon_signed_rank(neg).p;
        const double p_le = oracle::wilcoxon_enumerate(neg);  // P(W+ <= w) under the null
        const double p_eq = p + p_le - 1.0;
        EXPECT_GT(p_eq, 0.0);
        EXPECT_NEAR(p + q, 1.0 + p_eq, 1e-12);
    }
}

TEST(Wilcoxon, ExactNormalCrossover) {
    std::mt19937_64 eng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 15 + rng::uniform_index(eng, 11);
        const auto d = test::normal_sample(eng, n, rng::uniform(eng, -0.5, 0.8));
        const double e = wilcoxon_signed_rank(d, Alternative::greater, WilcoxonMethod::exact).p;
        const double a = wilcoxon_signed_rank(d, Alternative::greater, WilcoxonMethod::normal).p;
        worst = std::max(worst, std::abs(e - a));
    }
    EXPECT_LT(worst, 0.01);
}

TEST(Wilcoxon, BranchSelection) {
    EXPECT_TRUE(wilcoxon_signed_rank(gaussian(1, 25)).exact);
    EXPECT_FALSE(wilcoxon_signed_rank(gaussian(1, 26)).exact);
    const auto r = wilcoxon_signed_rank(gaussian(2, 40), Alternative::greater, WilcoxonMethod::exact);
    EXPECT_TRUE(r.exact);
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
}

TEST(TTest, Examples) {
    const auto z = paired_t(std::vector<double>{-1, 1, -2, 2});
    EXPECT_EQ(z.t, 0.0);
    ASSERT_TRUE(z.p.has_value());
    EXPECT_NEAR(*z.p, 0.5, 1e-15);
    const auto c = paired_t(std::vector<double>{1, 1, 1, 1});
    EXPECT_TRUE(c.degenerate);
    EXPECT_FALSE(c.p.has_value());
    EXPECT_THROW(paired_t(std::vector<double>{1.0}), StatsError);
}

TEST(TTest, PublishedQuantiles) {
    // Upper-tail critical values of Student t with 19 degrees of freedom.
    EXPECT_NEAR(student_t_upper_tail(1.7291328115213676, 19), 0.05, 1e-9);
    EXPECT_NEAR(student_t_upper_tail(2.0930240544083096, 19), 0.025, 1e-9);
    EXPECT_NEAR(student_t_upper_tail(2.8609346064649799, 19), 0.005, 1e-9);
    EXPECT_NEAR(student_t_upper_tail(-1.7291328115213676, 19), 0.95, 1e-9);
}

TEST(TTest, MatchesReferenceDistribution) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto d = gaussian(seed, 20, 0.3);
        const auto r = paired_t(d);
        const boost::math::students_t dist(19.0);
        const double ref = boost::math::cdf(boost::math::complement(dist, r.t));
        ASSERT_TRUE(r.p.has_value());
        EXPECT_NEAR(*r.p, ref, 1e-6);
        const auto two = paired_t(d, Alternative::two_sided);
        EXPECT_NEAR(*two.p, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 1e-6);
    }
    for (double df : {1.0, 2.5, 7.0, 30.0, 300.0}) {
        const boost::math::students_t dist(df);
        for (double t : {-3.0, -0.4, 0.0, 0.7, 2.2, 9.0}) {
            EXPECT_NEAR(student_t_upper_tail(t, df), boost::math::cdf(boost::math::complement(dist, t)), 1e-12);
        }
    }
}

TEST(Bh, Examples) {
    EXPECT_EQ(bh_adjust(std::vector<double>{0.03}), std::vector<double>{0.03});
    const auto a = bh_adjust(std::vector<double>{0.01, 0.04});
    EXPECT_DOUBLE_EQ(a[0], 0.02);
    EXPECT_DOUBLE_EQ(a[1], 0.04);
    EXPECT_THROW(bh_adjust(std::vector<double>{0.5, 1.2}), StatsError);
    EXPECT_TRUE(bh_adjust(std::vector<double>{}).empty());
}

TEST(Bh, DefinitionAndSupersetOfBonferroni) {
    std::mt19937_64 eng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + rng::uniform_index(eng, 20);
        std::vector<double> p(m);
        for (auto& x : p) x = rng::uniform01(eng) < 0.2 ? 0.01 * std::round(rng::uniform(eng, 0, 5)) : rng::uniform01(eng);
        const auto adj = bh_adjust(p);
        EXPECT_EQ(adj, oracle::bh_definition(p));
        for (std::size_t i = 0; i < m; ++i) {
            EXPECT_GE(adj[i], p[i]);
            EXPECT_LE(adj[i], 1.0);
            for (std::size_t j = 0; j < m; ++j) {
                if (p[i] <= p[j]) EXPECT_LE(adj[i], adj[j]);
            }
            if (std::min(1.0, p[i] * static_cast<double>(m)) < 0.05) EXPECT_LT(adj[i], 0.05);
        }
    }
}

TEST(Bootstrap, ConstantAndDeterminism) {
    const std::vector<double> c(15, 0.37);
    const auto ci = bootstrap_ci_mean(c, {2000, 0.95, 1});
    EXPECT_EQ(ci.low, 0.37);
    EXPECT_EQ(ci.high, 0.37);
    const auto d = gaussian(7, 27, 1.0);
    const BootstrapSettings s{10000, 0.95, 42};
    const auto a = bootstrap_ci_mean(d, s);
    EXPECT_EQ(a, bootstrap_ci_mean(d, s));
    EXPECT_EQ(a, serial::bootstrap_ci_mean(d, s));
    EXPECT_NE(a, bootstrap_ci_mean(d, {10000, 0.95, 43}));
    EXPECT_LE(a.low, mean(d));
    EXPECT_GE(a.high, mean(d));
    EXPECT_THROW(bootstrap_ci_mean(std::vector<double>{}, s), StatsError);
}

TEST(Bootstrap, OddResampleCountsMatchSerial) {
    const auto d = gaussian(8, 11);
    for (std::size_t b : {1u, 255u, 256u, 257u, 1001u}) {
        const BootstrapSettings s{b, 0.9, 5};
        EXPECT_EQ(bootstrap_ci_mean(d, s), serial::bootstrap_ci_mean(d, s));
    }
}

TEST(NearestRank, Definition) {
    const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_EQ(nearest_rank(v, 0.025), 1.0);
    EXPECT_EQ(nearest_rank(v, 0.1), 1.0);
    EXPECT_EQ(nearest_rank(v, 0.11), 2.0);
    EXPECT_EQ(nearest_rank(v, 0.975), 10.0);
    EXPECT_EQ(nearest_rank(v, 1.0), 10.0);
}

TEST(CohensD, Examples) {
    EXPECT_EQ(*cohens_d(std::vector<double>{-1, 1}), 0.0);
    EXPECT_NEAR(*cohens_d(std::vector<double>{0, 2}), 1.0 / std::sqrt(2.0), 1e-15);
    const auto d = gaussian(9, 20, 0.5);
    std::vector<double> scaled(d);
    for (auto& x : scaled) x *= 3.5;
    EXPECT_NEAR(*cohens_d(scaled), *cohens_d(d), 1e-12);
    EXPECT_FALSE(cohens_d(std::vector<double>{2, 2, 2}).has_value());
}

TEST(Winsorize, Examples) {
    const auto d = gaussian(10, 27);
    EXPECT_EQ(winsorize(d, 0.0), d);
    const auto w = winsorize(d, 0.01);
    std::vector<double> sorted(d);
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(*std::min_element(w.begin(), w.end()), sorted[1]);
    EXPECT_EQ(*std::max_element(w.begin(), w.end()), sorted[25]);
    EXPECT_EQ(winsorize(w, 0.01), w);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] != sorted.front() && d[i] != sorted.back()) EXPECT_EQ(w[i], d[i]);
    }
    EXPECT_THROW(winsorize(d, 0.5), StatsError);
}

TEST(WinRate, ZerosAreNotWins) {
    EXPECT_DOUBLE_EQ(win_rate(std::vector<double>{1, 0, -1, 2}), 0.5);
    EXPECT_EQ(median(std::vector<double>{3, 1, 2, 10}), 2.5);
    EXPECT_EQ(mean(std::vector<double>{1e9 + 1, 1e9 + 1, 1e9 + 1}), 1e9 + 1);
}

DailyGapSeries series(int h, std::string name, std::vector<double> g) {
    DailyGapSeries s;
    s.horizon_s = h;
    s.baseline = std::move(name);
    for (std::size_t i = 0; i < g.size(); ++i) s.days.push_back(Date(20200101 + static_cast<int>(i)));
    s.gaps = std::move(g);
    return s;
}

TEST(Evaluate, FamiliesAndInvariants) {
    std::vector<DailyGapSeries> in = {
        series(3600, "TWAP", gaussian(11, 27, 0.5)),
        series(1800, "TWAP", gaussian(12, 27, 0.1)),
        series(3600, "VWAP", gaussian(13, 27, 0.6)),
        series(1800, "VWAP", gaussian(14, 27, 0.0)),
    };
    StatsSettings s;
    s.bootstrap.resamples = 2000;
    const auto res = evaluate(in, s);
    ASSERT_EQ(res.size(), 4u);
    EXPECT_EQ(res[0].horizon_s, 1800);
    EXPECT_EQ(res[0].baseline, "TWAP");
    EXPECT_EQ(res[3].horizon_s, 3600);
    EXPECT_EQ(res[3].baseline, "VWAP");
    for (int h : {1800, 3600}) {
        std::vector<double> raw;
        std::vector<double> adj;
        for (const auto& r : res) {
            if (r.horizon_s != h) continue;
            raw.push_back(r.p_raw);
            adj.push_back(r.p_adj);
        }
        EXPECT_EQ(adj, bh_adjust(raw));
    }
    for (const auto& r : res) {
        EXPECT_GE(r.p_raw, 0.0);
        EXPECT_LE(r.p_raw, 1.0);
        EXPECT_LE(r.ci_low, r.mean_gap);
        EXPECT_GE(r.ci_high, r.mean_gap);
        EXPECT_EQ(r.n_days, 27u);
        EXPECT_FALSE(r.wilcoxon_exact);
        EXPECT_FALSE(r.winsorized);
    }
    s.winsorize = 0.01;
    EXPECT_TRUE(evaluate(in, s)[0].winsorized);
    std::vector<DailyGapSeries> tiny = {series(60, "TWAP", {1.0})};
    EXPECT_THROW(evaluate(tiny, s), StatsError);
}

TEST(Evaluate, SeriesSeedDependsOnIdentity) {
    EXPECT_NE(series_seed(0, 1800, "TWAP"), series_seed(0, 3600, "TWAP"));
    EXPECT_NE(series_seed(0, 1800, "TWAP"), series_seed(0, 1800, "VWAP"));
    EXPECT_EQ(series_seed(9, 1800, "TWAP"), series_seed(9, 1800, "TWAP"));
}

}  // namespace
}  // namespace lobsim::stats

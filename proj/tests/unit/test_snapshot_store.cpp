#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lobsim/snapshot_store.hpp"
#include "lobsim/synthetic.hpp"
#include "../support.hpp"

namespace lobsim {
namespace {

RawRow raw_from(const Snapshot& s) {
    RawRow r;
    r.timestamp_ns = s.timestamp_ns;
    for (std::size_t i = 0; i < kDepth; ++i) {
        r.values[i] = s.bids[i].price;
        r.values[kDepth + i] = s.bids[i].size;
        r.values[2 * kDepth + i] = s.asks[i].price;
        r.values[3 * kDepth + i] = s.asks[i].size;
    }
    return r;
}

Snapshot simple(std::int64_t ts, double bid = 100.0, double ask = 101.0) {
    return test::make_snapshot(ts, {{bid, 1.0}, {bid - 1.0, 2.0}}, {{ask, 1.0}, {ask + 1.0, 2.0}});
}

TEST(Snapshot, MidPriceExamples) {
    EXPECT_DOUBLE_EQ(mid_price(simple(0, 99.5, 100.5)), 100.0);
    EXPECT_DOUBLE_EQ(mid_price(simple(0, 100.0, 102.0)), 101.0);
    std::mt19937_64 eng(7);
    for (int i = 0; i < 500; ++i) {
        const Snapshot s = test::random_snapshot(eng);
        ASSERT_TRUE(is_valid_snapshot(s));
        EXPECT_GT(mid_price(s), s.best_bid());
        EXPECT_LT(mid_price(s), s.best_ask());
    }
}

TEST(Snapshot, DateParse) {
    EXPECT_EQ(Date::parse("20200131").value(), 20200131);
    EXPECT_EQ(Date(20200201).str(), "20200201");
    EXPECT_THROW(Date::parse("2020013"), std::invalid_argument);
    EXPECT_THROW(Date::parse("20200230"), std::invalid_argument);
}

TEST(ForwardFill, EighteenLevelsPadded) {
    std::vector<BookLevel> lv;
    for (int i = 0; i < 18; ++i) lv.push_back({100.0 - i, 1.0 + i});
    const Ladder l = forward_fill_levels(lv);
    for (int i = 0; i < 18; ++i) EXPECT_EQ(l[i], lv[i]);
    EXPECT_EQ(l[18].size, 0.0);
    EXPECT_EQ(l[19].size, 0.0);
    EXPECT_EQ(l[18].price, lv[17].price);
    EXPECT_EQ(l[19].price, lv[17].price);
}

TEST(ForwardFill, FullLadderIdentity) {
    std::vector<BookLevel> lv;
    for (int i = 0; i < 20; ++i) lv.push_back({100.0 - 0.5 * i, 0.3 * i + 0.1});
    const Ladder l = forward_fill_levels(lv);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(l[i], lv[i]);
}

TEST(ForwardFill, SingleLevel) {
    const Snapshot s = test::make_snapshot(0, {{99.0, 3.0}}, {{101.0, 4.0}});
    EXPECT_EQ(s.best_bid(), 99.0);
    EXPECT_EQ(s.best_ask(), 101.0);
    for (std::size_t i = 1; i < kDepth; ++i) {
        EXPECT_EQ(s.bids[i].size, 0.0);
        EXPECT_EQ(s.asks[i].size, 0.0);
    }
    EXPECT_TRUE(is_valid_snapshot(s));
    EXPECT_THROW(forward_fill_levels({}), std::invalid_argument);
}

TEST(IndexAtOrAfter, Boundaries) {
    const auto day = test::static_day(simple(0), 10);
    const std::int64_t t0 = (*day)[0].timestamp_ns;
    EXPECT_EQ(index_at_or_after(*day, t0), 0u);
    EXPECT_EQ(index_at_or_after(*day, t0 - 5), 0u);
    EXPECT_EQ(index_at_or_after(*day, t0 + 4 * kNanosPerSecond + 1), 5u);
    EXPECT_EQ(index_at_or_after(*day, (*day)[9].timestamp_ns), 9u);
    EXPECT_THROW(index_at_or_after(*day, (*day)[9].timestamp_ns + 1), std::out_of_range);
}

TEST(BuildDay, DuplicateTimestampKeepsFirst) {
    std::vector<RawRow> rows = {raw_from(simple(1)), raw_from(simple(1, 200.0, 201.0)), raw_from(simple(2))};
    const LoadedDay d = build_day(Date(20200101), rows);
    EXPECT_EQ(d.day.size(), 2u);
    EXPECT_EQ(d.quality.rows_dropped_duplicate_ts, 1u);
    EXPECT_EQ(d.day[0].best_bid(), 100.0);
    EXPECT_TRUE(d.quality.reconciles());
}

TEST(BuildDay, LockedBookDropped) {
    std::vector<RawRow> rows = {raw_from(simple(1)), raw_from(simple(2))};
    rows[1].values[0] = 100.0;
    rows[1].values[2 * kDepth] = 100.0;
    const LoadedDay d = build_day(Date(20200101), rows);
    EXPECT_EQ(d.day.size(), 1u);
    EXPECT_EQ(d.quality.rows_dropped_nonpositive_spread, 1u);
    EXPECT_TRUE(d.quality.reconciles());
}

TEST(BuildDay, FiltersAndClips) {
    std::vector<RawRow> rows;
    for (int i = 0; i < 8; ++i) rows.push_back(raw_from(simple(10 + i)));
    rows[2].values[0] = std::numeric_limits<double>::quiet_NaN();  // invalid top
    rows[3].values[0] = -1.0;                                      // invalid top
    rows[4].values[kDepth + 1] = -3.0;                             // clipped size
    rows[5].values[0] = 5.0;                                       // outside 10x band
    rows[5].values[1] = 4.0;
    rows[6].values[1] = 100.5;                                     // bid ladder not decreasing
    const LoadedDay d = build_day(Date(20200101), rows);
    EXPECT_EQ(d.quality.rows_in, 8u);
    EXPECT_EQ(d.quality.rows_dropped_invalid_top, 2u);
    EXPECT_EQ(d.quality.rows_dropped_price_band, 1u);
    EXPECT_EQ(d.quality.rows_dropped_unordered, 1u);
    EXPECT_EQ(d.quality.values_clipped, 1u);
    EXPECT_EQ(d.day.size(), 4u);
    EXPECT_TRUE(d.quality.reconciles());
    for (const auto& s : d.day.snapshots) EXPECT_TRUE(is_valid_snapshot(s));
}

TEST(BuildDay, NothingSurvivesThrows) {
    std::vector<RawRow> rows = {raw_from(simple(1))};
    rows[0].values[0] = 0.0;
    EXPECT_THROW(build_day(Date(20200101), rows), DataError);
}

TEST(LoadDay, FullDayAllCountersZero) {
    synthetic::MarketParams p;
    p.snapshots = 86'400;
    const DayBook day = synthetic::generate_day(Date(20200105), p, 3);
    test::TempDir dir;
    const auto path = dir / day_file_name(day.date, DayFormat::binary);
    write_day(day, path, DayFormat::binary);
    const LoadedDay d = load_day(path);
    EXPECT_EQ(d.day.size(), 86'400u);
    EXPECT_EQ(d.quality.dropped_total(), 0u);
    EXPECT_EQ(d.quality.values_clipped, 0u);
    for (std::size_t i = 0; i < d.day.size(); ++i) {
        ASSERT_TRUE(is_valid_snapshot(d.day[i]));
        if (i > 0) ASSERT_LT(d.day[i - 1].timestamp_ns, d.day[i].timestamp_ns);
    }
}

TEST(LoadDay, RoundTripIsIdempotent) {
    synthetic::MarketParams p;
    p.snapshots = 500;
    const DayBook day = synthetic::generate_day(Date(20200106), p, 11);
    test::TempDir dir;
    for (DayFormat f : {DayFormat::csv, DayFormat::binary}) {
        const auto a = dir / day_file_name(day.date, f);
        write_day(day, a, f);
        const LoadedDay first = load_day(a);
        EXPECT_EQ(first.day.snapshots, day.snapshots);
        EXPECT_EQ(first.day.date, day.date);
        const auto b = dir.path() / "again";
        std::filesystem::create_directories(b);
        write_day(first.day, b / day_file_name(day.date, f), f);
        EXPECT_EQ(test::read_file(a), test::read_file(b / day_file_name(day.date, f)));
    }
}

TEST(LoadDay, CsvErrors) {
    test::TempDir dir;
    const auto bad_cols = dir / "20200101.csv";
    test::write_file(bad_cols, "timestamp_ns,a,b\n1,2,3\n");
    EXPECT_THROW(load_day(bad_cols), DataError);

    const auto short_row = dir / "20200102.csv";
    std::string text = csv_header() + "\n1";
    for (int i = 0; i < 79; ++i) text += ",1";
    test::write_file(short_row, text + "\n");
    EXPECT_THROW(load_day(short_row), DataError);

    EXPECT_THROW(load_day(dir / "20200103.csv"), DataError);
    EXPECT_THROW(date_from_path("notadate.csv"), DataError);
    EXPECT_THROW(format_from_path("20200101.txt"), DataError);

    const auto bad_magic = dir / "20200104.lobd";
    test::write_file(bad_magic, "NOPE!");
    EXPECT_THROW(load_day(bad_magic), DataError);
}

TEST(LoadDay, CsvHeaderLayout) {
    const std::string h = csv_header();
    EXPECT_EQ(std::count(h.begin(), h.end(), ','), 80);
    EXPECT_EQ(h.rfind("timestamp_ns,bid_px_0,", 0), 0u);
    EXPECT_NE(h.find("ask_sz_19"), std::string::npos);
}

}  // namespace
}  // namespace lobsim

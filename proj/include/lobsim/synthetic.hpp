#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/snapshot_store.hpp"

namespace lobsim::synthetic {

/// Parameters of the generated market. The mid is a slow random-walk trend
/// times (1 + u) where u is a fast AR(1) deviation, so short-term moves
/// partly revert. Ladders sit at a fixed bps spacing; bid depth co-moves
/// with u with the given correlation weight.
struct MarketParams {
    std::size_t snapshots = 7200;
    double initial_mid = 10000.0;
    double tick = 0.01;
    double spread_bps = 1.0;
    double level_spacing_bps = 1.0;
    double trend_vol_bps = 0.2;  ///< per-snapshot sd of the trend log-return
    double ar_phi = 0.5;
    double ar_vol_bps = 2.0;  ///< innovation sd of u
    double level_size = 2.0;  ///< mean BTC per level
    double size_noise = 0.2;
    double depth_corr = -0.1;  ///< bid depth scale per stationary sd of u

    void validate() const;
};

/// Midnight UTC of `date` in nanoseconds since the epoch.
std::int64_t day_start_ns(Date date);

/// `count` consecutive calendar days starting at `first`.
std::vector<Date> consecutive_dates(Date first, std::size_t count);

DayBook generate_day(Date date, const MarketParams& params, std::uint64_t seed);

/// Constant book: every snapshot has bids mid - half_spread - l * spacing
/// and asks mirrored, each level holding `level_size`.
DayBook flat_day(Date date, std::size_t snapshots, double mid, double half_spread, double spacing,
                 double level_size);

/// Writes one file per day into `dir` and returns the paths in date order.
std::vector<std::filesystem::path> write_month(const std::filesystem::path& dir, Date first, std::size_t days,
                                               const MarketParams& params, std::uint64_t seed, DayFormat format);

}  // namespace lobsim::synthetic

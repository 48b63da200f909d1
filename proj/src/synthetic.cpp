#include "lobsim/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>

#include "lobsim/rng.hpp"

namespace lobsim::synthetic {

void MarketParams::validate() const {
    if (snapshots == 0) throw std::invalid_argument("synthetic: snapshots must be >= 1");
    if (!(initial_mid > 0.0) || !(tick > 0.0)) throw std::invalid_argument("synthetic: mid and tick must be positive");
    if (!(spread_bps > 0.0) || !(level_spacing_bps > 0.0)) throw std::invalid_argument("synthetic: spacings must be positive");
    if (!(ar_phi >= 0.0 && ar_phi < 1.0)) throw std::invalid_argument("synthetic: ar_phi must lie in [0, 1)");
    if (!(trend_vol_bps >= 0.0) || !(ar_vol_bps >= 0.0) || !(size_noise >= 0.0)) {
        throw std::invalid_argument("synthetic: volatilities must be non-negative");
    }
    if (!(level_size > 0.0)) throw std::invalid_argument("synthetic: level_size must be positive");
}

std::int64_t day_start_ns(Date date) {
    using namespace std::chrono;
    const int v = date.value();
    const year_month_day ymd{year{v / 10000}, month{static_cast<unsigned>((v / 100) % 100)},
                             day{static_cast<unsigned>(v % 100)}};
    if (!ymd.ok()) throw std::invalid_argument("invalid date " + date.str());
    return static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * 86400 * kNanosPerSecond;
}

std::vector<Date> consecutive_dates(Date first, std::size_t count) {
    using namespace std::chrono;
    const int v = first.value();
    sys_days d{year_month_day{year{v / 10000}, month{static_cast<unsigned>((v / 100) % 100)},
                              day{static_cast<unsigned>(v % 100)}}};
    std::vector<Date> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i, d += days{1}) {
        const year_month_day ymd{d};
        out.emplace_back(static_cast<int>(ymd.year()) * 10000 + static_cast<int>(static_cast<unsigned>(ymd.month())) * 100 +
                         static_cast<int>(static_cast<unsigned>(ymd.day())));
    }
    return out;
}

namespace {

double to_tick(double px, double tick) { return std::round(px / tick) * tick; }

}  // namespace

DayBook generate_day(Date date, const MarketParams& p, std::uint64_t seed) {
    p.validate();
    std::mt19937_64 eng(rng::derive(seed, static_cast<std::uint64_t>(date.value())));
    const double stationary_sd = p.ar_vol_bps * 1e-4 / std::sqrt(1.0 - p.ar_phi * p.ar_phi);

    DayBook day;
    day.date = date;
    day.snapshots.resize(p.snapshots);
    const std::int64_t t0 = day_start_ns(date);
    double log_trend = std::log(p.initial_mid);
    double u = stationary_sd > 0.0 ? stationary_sd * rng::standard_normal(eng) : 0.0;

    for (std::size_t t = 0; t < p.snapshots; ++t) {
        if (t > 0) {
            log_trend += p.trend_vol_bps * 1e-4 * rng::standard_normal(eng);
            u = p.ar_phi * u + p.ar_vol_bps * 1e-4 * rng::standard_normal(eng);
        }
        const double mid = std::exp(log_trend) * (1.0 + u);
        const double spread = std::max(p.tick, to_tick(p.spread_bps * 1e-4 * mid, p.tick));
        const double spacing = std::max(p.tick, to_tick(p.level_spacing_bps * 1e-4 * mid, p.tick));
        const double best_bid = to_tick(mid - 0.5 * spread, p.tick);
        const double best_ask = best_bid + spread;

        const double z = stationary_sd > 0.0 ? u / stationary_sd : 0.0;
        const double bid_scale = std::max(0.1, 1.0 + p.depth_corr * z);
        const double ask_scale = std::max(0.1, 1.0 - p.depth_corr * z);

        Snapshot& s = day.snapshots[t];
        s.timestamp_ns = t0 + static_cast<std::int64_t>(t) * kSnapshotIntervalNs;
        for (std::size_t l = 0; l < kDepth; ++l) {
            const double off = static_cast<double>(l) * spacing;
            const double nb = std::max(0.05, 1.0 + p.size_noise * rng::standard_normal(eng));
            const double na = std::max(0.05, 1.0 + p.size_noise * rng::standard_normal(eng));
            s.bids[l] = {to_tick(best_bid - off, p.tick), p.level_size * bid_scale * nb};
            s.asks[l] = {to_tick(best_ask + off, p.tick), p.level_size * ask_scale * na};
        }
    }
    return day;
}

DayBook flat_day(Date date, std::size_t snapshots, double mid, double half_spread, double spacing,
                 double level_size) {
    if (snapshots == 0) throw std::invalid_argument("flat_day: snapshots must be >= 1");
    if (!(half_spread > 0.0) || !(spacing > 0.0) || !(level_size > 0.0)) {
        throw std::invalid_argument("flat_day: spread, spacing and size must be positive");
    }
    Snapshot proto;
    for (std::size_t l = 0; l < kDepth; ++l) {
        proto.bids[l] = {mid - half_spread - static_cast<double>(l) * spacing, level_size};
        proto.asks[l] = {mid + half_spread + static_cast<double>(l) * spacing, level_size};
    }
    DayBook day;
    day.date = date;
    day.snapshots.assign(snapshots, proto);
    const std::int64_t t0 = day_start_ns(date);
    for (std::size_t t = 0; t < snapshots; ++t) {
        day.snapshots[t].timestamp_ns = t0 + static_cast<std::int64_t>(t) * kSnapshotIntervalNs;
    }
    return day;
}

std::vector<std::filesystem::path> write_month(const std::filesystem::path& dir, Date first, std::size_t days,
                                               const MarketParams& params, std::uint64_t seed, DayFormat format) {
    std::filesystem::create_directories(dir);
    const auto dates = consecutive_dates(first, days);
    std::vector<std::filesystem::path> paths(dates.size());
    const auto n = static_cast<std::ptrdiff_t>(dates.size());
    std::vector<std::exception_ptr> errors(dates.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            paths[k] = dir / day_file_name(dates[k], format);
            write_day(generate_day(dates[k], params, seed), paths[k], format);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return paths;
}

}  // namespace lobsim::synthetic

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lobsim {

inline constexpr std::size_t kDepth = 20;
inline constexpr std::int64_t kNanosPerSecond = 1'000'000'000;
/// Replay cadence. One snapshot per second, one environment step per snapshot.
inline constexpr std::int64_t kSnapshotIntervalNs = kNanosPerSecond;

/// A size of zero marks an absent (forward-filled) level.
struct BookLevel {
    double price = 0.0;
    double size = 0.0;

    bool operator==(const BookLevel&) const = default;
};

using Ladder = std::array<BookLevel, kDepth>;

/// Depth-20 two-sided book. Both ladders are best-first.
struct Snapshot {
    std::int64_t timestamp_ns = 0;
    Ladder bids{};
    Ladder asks{};

    double best_bid() const noexcept { return bids[0].price; }
    double best_ask() const noexcept { return asks[0].price; }

    bool operator==(const Snapshot&) const = default;
};

/// Calendar day stored as YYYYMMDD.
class Date {
public:
    constexpr Date() = default;
    explicit constexpr Date(int yyyymmdd) : value_(yyyymmdd) {}

    /// Accepts "YYYYMMDD"; throws std::invalid_argument otherwise.
    static Date parse(std::string_view text);

    constexpr int value() const noexcept { return value_; }
    std::string str() const;

    auto operator<=>(const Date&) const = default;

private:
    int value_ = 0;
};

struct DayBook {
    Date date;
    std::vector<Snapshot> snapshots;

    std::size_t size() const noexcept { return snapshots.size(); }
    const Snapshot& operator[](std::size_t i) const { return snapshots[i]; }
};

using DayBookPtr = std::shared_ptr<const DayBook>;

inline double mid_price(const Snapshot& s) noexcept {
    return 0.5 * (s.best_bid() + s.best_ask());
}

/// Raised for unreadable or unusable market data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lobsim

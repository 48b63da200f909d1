#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lobsim/book.hpp"

namespace lobsim {

/// Bit set of degenerate-denominator fallbacks taken while computing
/// indicators. Each fallback returns a neutral finite value.
enum DegeneracyFlag : std::uint32_t {
    kNone = 0,
    kMicroPriceFallback = 1u << 0,
    kImbalanceTopZero = 1u << 1,
    kImbalanceMultiZero = 1u << 2,
    kVampBidFallback = 1u << 3,
    kVampAskFallback = 1u << 4,
    kOfiZero = 1u << 5,
    kOfiClamped = 1u << 6,
    kBpiClamped = 1u << 7,
    kDeltasFirst = 1u << 8,
};
using DegeneracyFlags = std::uint32_t;

inline constexpr double kBpiMin = 1e-6;
inline constexpr double kBpiMax = 1e6;

/// Field order is the export and observation order.
struct IndicatorVector {
    double micro_price = 0.0;
    double imbalance_top = 0.0;
    double imbalance_multi = 0.0;
    double spread_norm = 0.0;
    double depth_bid = 0.0;
    double depth_ask = 0.0;
    double vamp = 0.0;
    double ofi = 0.0;
    double bpi = 0.0;
    double delta_mid = 0.0;
    double delta_vamp = 0.0;

    static constexpr std::size_t kCount = 11;
    static const std::array<std::string_view, kCount>& names();

    std::array<double, kCount> to_array() const noexcept;

    bool operator==(const IndicatorVector&) const = default;
};

double micro_price(const Snapshot& s, DegeneracyFlags* flags = nullptr);
double imbalance_top(const Snapshot& s, DegeneracyFlags* flags = nullptr);
double imbalance_multi(const Snapshot& s, std::size_t levels, DegeneracyFlags* flags = nullptr);
double spread_norm(const Snapshot& s);

struct Depths {
    double bid = 0.0;
    double ask = 0.0;
};
Depths depths(const Snapshot& s);

double vamp(const Snapshot& s, DegeneracyFlags* flags = nullptr);
double ofi(const Snapshot& prev, const Snapshot& cur, DegeneracyFlags* flags = nullptr);
double bpi(const Snapshot& s, DegeneracyFlags* flags = nullptr);

struct Deltas {
    double mid = 0.0;
    double vamp = 0.0;
};
/// First differences of mid and VAMP. Pass prev == nullptr for the first
/// snapshot of an episode (both deltas zero, flagged).
Deltas deltas(const Snapshot* prev, const Snapshot& cur, DegeneracyFlags* flags = nullptr);

/// Summed top-20 size per side.
double total_bid_size(const Snapshot& s) noexcept;
double total_ask_size(const Snapshot& s) noexcept;

struct IndicatorResult {
    IndicatorVector values;
    DegeneracyFlags flags = kNone;
};

/// Full vector. prev == nullptr zeroes the two-snapshot features (OFI and
/// deltas) and flags them.
IndicatorResult compute_indicators(const Snapshot* prev, const Snapshot& cur);

/// Indicator rows for snapshots [begin, end). The first row treats
/// `begin` as an episode start. OpenMP-parallel over rows.
std::vector<IndicatorVector> indicator_series(const DayBook& day, std::size_t begin, std::size_t end);

namespace serial {
std::vector<IndicatorVector> indicator_series(const DayBook& day, std::size_t begin, std::size_t end);
}

using CorrelationMatrix = std::array<std::array<double, IndicatorVector::kCount>, IndicatorVector::kCount>;

struct CorrelationResult {
    CorrelationMatrix matrix{};
    /// Columns with zero variance; their off-diagonal entries are 0.
    std::array<bool, IndicatorVector::kCount> degenerate{};
};

/// Pearson correlations between indicator columns. Requires >= 2 rows.
CorrelationResult correlation_matrix(std::span<const IndicatorVector> rows);

}  // namespace lobsim

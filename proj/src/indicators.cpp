#include "lobsim/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lobsim {

namespace {

void raise(DegeneracyFlags* flags, DegeneracyFlag f) {
    if (flags != nullptr) *flags |= f;
}

double side_total(const Ladder& ladder, std::size_t levels) noexcept {
    double total = 0.0;
    for (std::size_t i = 0; i < levels; ++i) total += ladder[i].size;
    return total;
}

double imbalance(double q_bid, double q_ask, DegeneracyFlags* flags, DegeneracyFlag flag) {
    const double den = q_bid + q_ask;
    if (!(den > 0.0)) {
        raise(flags, flag);
        return 0.0;
    }
    return (q_bid - q_ask) / den;
}

/// Size-weighted mean price of one side; nullopt-like signalled by total <= 0.
double weighted_side_price(const Ladder& ladder, bool& empty) {
    double notional = 0.0;
    double size = 0.0;
    for (const auto& lvl : ladder) {
        notional += lvl.size * lvl.price;
        size += lvl.size;
    }
    empty = !(size > 0.0);
    return empty ? ladder[0].price : notional / size;
}

}  // namespace

const std::array<std::string_view, IndicatorVector::kCount>& IndicatorVector::names() {
    static const std::array<std::string_view, kCount> kNames = {
        "micro_price", "imbalance_top", "imbalance_multi", "spread_norm", "depth_bid", "depth_ask",
        "vamp",        "ofi",           "bpi",             "delta_mid",   "delta_vamp"};
    return kNames;
}

std::array<double, IndicatorVector::kCount> IndicatorVector::to_array() const noexcept {
    return {micro_price, imbalance_top, imbalance_multi, spread_norm, depth_bid, depth_ask,
            vamp,        ofi,           bpi,             delta_mid,   delta_vamp};
}

double total_bid_size(const Snapshot& s) noexcept { return side_total(s.bids, kDepth); }
double total_ask_size(const Snapshot& s) noexcept { return side_total(s.asks, kDepth); }

double micro_price(const Snapshot& s, DegeneracyFlags* flags) {
    const double q_bid = s.bids[0].size;
    const double q_ask = s.asks[0].size;
    const double den = q_bid + q_ask;
    if (!(den > 0.0)) {
        raise(flags, kMicroPriceFallback);
        return mid_price(s);
    }
    return (s.best_ask() * q_bid + s.best_bid() * q_ask) / den;
}

double imbalance_top(const Snapshot& s, DegeneracyFlags* flags) {
    return imbalance(s.bids[0].size, s.asks[0].size, flags, kImbalanceTopZero);
}

double imbalance_multi(const Snapshot& s, std::size_t levels, DegeneracyFlags* flags) {
    if (levels < 1 || levels > kDepth) throw std::invalid_argument("imbalance_multi: levels must be in [1, 20]");
    return imbalance(side_total(s.bids, levels), side_total(s.asks, levels), flags, kImbalanceMultiZero);
}

double spread_norm(const Snapshot& s) {
    return (s.best_ask() - s.best_bid()) / mid_price(s) * 100.0;
}

Depths depths(const Snapshot& s) {
    Depths d;
    for (std::size_t i = 0; i < kDepth; ++i) {
        d.bid += s.bids[i].size * s.bids[i].price;
        d.ask += s.asks[i].size * s.asks[i].price;
    }
    return d;
}

double vamp(const Snapshot& s, DegeneracyFlags* flags) {
    bool bid_empty = false;
    bool ask_empty = false;
    const double bid_side = weighted_side_price(s.bids, bid_empty);
    const double ask_side = weighted_side_price(s.asks, ask_empty);
    if (bid_empty) raise(flags, kVampBidFallback);
    if (ask_empty) raise(flags, kVampAskFallback);
    return 0.5 * (ask_side + bid_side);
}

double ofi(const Snapshot& prev, const Snapshot& cur, DegeneracyFlags* flags) {
    const double dq_bid = total_bid_size(cur) - total_bid_size(prev);
    const double dq_ask = total_ask_size(cur) - total_ask_size(prev);
    const double den = dq_bid + dq_ask;
    if (den == 0.0) {
        raise(flags, kOfiZero);
        return 0.0;
    }
    // Opposite-signed changes can push the ratio outside [-1, 1].
    const double value = (dq_bid - dq_ask) / den;
    if (!(std::abs(value) <= 1.0)) {
        raise(flags, kOfiClamped);
        return value > 0.0 ? 1.0 : -1.0;
    }
    return value;
}

double bpi(const Snapshot& s, DegeneracyFlags* flags) {
    const double mid = mid_price(s);
    double bid_pressure = 0.0;
    double ask_pressure = 0.0;
    for (std::size_t i = 0; i < kDepth; ++i) {
        if (s.bids[i].size > 0.0) bid_pressure += s.bids[i].size / std::abs(s.bids[i].price - mid);
        if (s.asks[i].size > 0.0) ask_pressure += s.asks[i].size / std::abs(s.asks[i].price - mid);
    }
    if (bid_pressure == 0.0 && ask_pressure == 0.0) {
        raise(flags, kBpiClamped);
        return 1.0;
    }
    if (ask_pressure == 0.0) {
        raise(flags, kBpiClamped);
        return kBpiMax;
    }
    const double ratio = bid_pressure / ask_pressure;
    if (!(ratio >= kBpiMin && ratio <= kBpiMax)) {
        raise(flags, kBpiClamped);
        return std::clamp(ratio, kBpiMin, kBpiMax);
    }
    return ratio;
}

Deltas deltas(const Snapshot* prev, const Snapshot& cur, DegeneracyFlags* flags) {
    if (prev == nullptr) {
        raise(flags, kDeltasFirst);
        return {};
    }
    return {mid_price(cur) - mid_price(*prev), vamp(cur) - vamp(*prev)};
}

IndicatorResult compute_indicators(const Snapshot* prev, const Snapshot& cur) {
    IndicatorResult r;
    auto& v = r.values;
    DegeneracyFlags* f = &r.flags;
    v.micro_price = micro_price(cur, f);
    v.imbalance_top = imbalance_top(cur, f);
    v.imbalance_multi = imbalance_multi(cur, kDepth, f);
    v.spread_norm = spread_norm(cur);
    const Depths d = depths(cur);
    v.depth_bid = d.bid;
    v.depth_ask = d.ask;
    v.vamp = vamp(cur, f);
    if (prev != nullptr) {
        v.ofi = ofi(*prev, cur, f);
        const double prev_vamp = vamp(*prev);
        v.delta_mid = mid_price(cur) - mid_price(*prev);
        v.delta_vamp = v.vamp - prev_vamp;
    } else {
        r.flags |= kOfiZero | kDeltasFirst;
    }
    v.bpi = bpi(cur, f);
    return r;
}

std::vector<IndicatorVector> indicator_series(const DayBook& day, std::size_t begin, std::size_t end) {
    if (begin > end || end > day.size()) throw std::out_of_range("indicator_series: bad range");
    std::vector<IndicatorVector> out(end - begin);
    const auto n = static_cast<std::ptrdiff_t>(end - begin);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::size_t i = begin + static_cast<std::size_t>(k);
        const Snapshot* prev = k > 0 ? &day[i - 1] : nullptr;
        out[static_cast<std::size_t>(k)] = compute_indicators(prev, day[i]).values;
    }
    return out;
}

namespace serial {

std::vector<IndicatorVector> indicator_series(const DayBook& day, std::size_t begin, std::size_t end) {
    if (begin > end || end > day.size()) throw std::out_of_range("indicator_series: bad range");
    std::vector<IndicatorVector> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back(compute_indicators(i > begin ? &day[i - 1] : nullptr, day[i]).values);
    }
    return out;
}

}  // namespace serial

CorrelationResult correlation_matrix(std::span<const IndicatorVector> rows) {
    constexpr std::size_t K = IndicatorVector::kCount;
    if (rows.size() < 2) throw std::invalid_argument("correlation_matrix: need at least 2 rows");

    // Single-pass co-moment accumulation.
    std::array<double, K> mean{};
    CorrelationMatrix co{};
    double n = 0.0;
    for (const auto& row : rows) {
        const auto x = row.to_array();
        for (double v : x) {
            if (!std::isfinite(v)) throw std::invalid_argument("correlation_matrix: non-finite value");
        }
        n += 1.0;
        std::array<double, K> d_old{};
        for (std::size_t i = 0; i < K; ++i) {
            d_old[i] = x[i] - mean[i];
            mean[i] += d_old[i] / n;
        }
        for (std::size_t i = 0; i < K; ++i) {
            const double d_new = x[i] - mean[i];
            for (std::size_t j = 0; j <= i; ++j) co[i][j] += d_old[j] * d_new;
        }
    }

    CorrelationResult out;
    for (std::size_t i = 0; i < K; ++i) out.degenerate[i] = !(co[i][i] > 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        out.matrix[i][i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            double r = 0.0;
            if (!out.degenerate[i] && !out.degenerate[j]) {
                r = std::clamp(co[i][j] / std::sqrt(co[i][i] * co[j][j]), -1.0, 1.0);
            }
            out.matrix[i][j] = r;
            out.matrix[j][i] = r;
        }
    }
    return out;
}

}  // namespace lobsim

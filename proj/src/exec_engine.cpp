#include "lobsim/exec_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>


namespace lobsim {

void FeeSchedule::validate() const {
    auto ok = [](double f) { return std::isfinite(f) && f >= 0.0 && f <= 0.05; };
    if (!ok(taker_fee) || !ok(maker_rebate)) {
        throw std::invalid_argument("fees must lie in [0, 0.05]");
    }
}

void ImpactParams::validate() const {
    if (!std::isfinite(coeff) || coeff < 0.0) throw std::invalid_argument("impact coeff must be >= 0");
    if (!(size_exponent > 0.0 && size_exponent <= 1.0)) {
        throw std::invalid_argument("impact size_exponent must lie in (0, 1]");
    }
    if (!std::isfinite(half_life_s) || !(half_life_s > 0.0)) {
        throw std::invalid_argument("impact half_life_s must be > 0");
    }
}

ImpactState decay_impact(ImpactState state, const ImpactParams& params, std::int64_t now_ns) {
    if (now_ns < state.last_update_ns) throw std::invalid_argument("decay_impact: time moved backwards");
    const double dt_s = static_cast<double>(now_ns - state.last_update_ns) / static_cast<double>(kNanosPerSecond);
    if (dt_s > 0.0) state.displacement *= std::exp2(-dt_s / params.half_life_s);
    state.last_update_ns = now_ns;
    return state;
}

Execution execute_market_sell(const Snapshot& book, double qty, ImpactState state, const ImpactParams& params,
                              const FeeSchedule& fees, double liquidity_ref) {
    if (!std::isfinite(qty) || qty < 0.0) {
        throw std::invalid_argument("execute_market_sell: quantity must be finite and >= 0");
    }
    Execution out;
    out.fill.requested_qty = qty;
    out.impact = state;
    if (qty == 0.0) return out;

    double remaining = qty;
    double proceeds = 0.0;
    for (const auto& lvl : book.bids) {
        if (remaining <= 0.0) break;
        if (lvl.size <= 0.0) continue;
        const double take = std::min(remaining, lvl.size);
        const double px = std::max(0.0, lvl.price + state.displacement);
        proceeds += take * px;
        out.fill.filled_qty += take;
        remaining -= take;
        ++out.fill.levels_consumed;
    }

    auto& fill = out.fill;
    if (fill.filled_qty > 0.0) {
        fill.gross_proceeds = proceeds;
        fill.avg_price = proceeds / fill.filled_qty;
        fill.fee_paid = fees.taker_fee * proceeds;

        const double mid = mid_price(book);
        const double ratio = fill.filled_qty / std::max(liquidity_ref, kLiquidityFloor);
        const double shift = params.coeff * std::pow(ratio, params.size_exponent) * mid;
        out.impact.displacement = std::max(state.displacement - shift, -0.5 * mid);
    }
    return out;
}

std::optional<std::size_t> execution_index(std::size_t decision_index, std::size_t last_index) noexcept {
    if (decision_index >= last_index) return std::nullopt;
    return decision_index + 1;
}

double mark_to_market(const Snapshot& book, const PortfolioState& portfolio) noexcept {
    return portfolio.cash + portfolio.inventory * mid_price(book);
}

void settle(PortfolioState& portfolio, const Fill& fill) noexcept {
    portfolio.cash += fill.net_proceeds();
    portfolio.inventory = std::max(0.0, portfolio.inventory - fill.filled_qty);
}

}  // namespace lobsim

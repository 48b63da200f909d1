#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "lobsim/book.hpp"

namespace lobsim {

/// Fractions of notional. Market orders pay taker_fee; the rebate is carried
/// for limit-order extensions and never applied by the market-sell path.
struct FeeSchedule {
    double taker_fee = 0.001;
    double maker_rebate = 0.0;

    void validate() const;
};

/// Transient impact: each fill pushes the effective bid ladder down by
/// coeff * (filled / liquidity)^size_exponent * mid, and the displacement
/// decays with the given half-life.
struct ImpactParams {
    double coeff = 0.3;
    double size_exponent = 0.5;
    double half_life_s = 60.0;

    void validate() const;
};

struct EngineParams {
    FeeSchedule fees;
    ImpactParams impact;
};

struct ImpactState {
    /// Signed price shift applied to displayed bids; <= 0 for a sell program.
    double displacement = 0.0;
    std::int64_t last_update_ns = 0;
};

struct Fill {
    double requested_qty = 0.0;
    double filled_qty = 0.0;
    /// Pre-fee, post-impact. Zero when nothing filled.
    double avg_price = 0.0;
    double gross_proceeds = 0.0;
    double fee_paid = 0.0;
    std::size_t levels_consumed = 0;

    double net_proceeds() const noexcept { return gross_proceeds - fee_paid; }
};

struct PortfolioState {
    double cash = 0.0;
    double inventory = 0.0;
};

inline constexpr double kLiquidityFloor = 1e-9;

ImpactState decay_impact(ImpactState state, const ImpactParams& params, std::int64_t now_ns);

struct Execution {
    Fill fill;
    ImpactState impact;
};

/// Walks the displayed bid ladder (shifted by the pre-trade displacement)
/// best-first with a partial fill at the marginal level. The order's own
/// footprint only affects later executions. Unfilled quantity is dropped.
/// `state` must already be decayed to the book timestamp; `liquidity_ref`
/// is the snapshot's top-20 bid size.
Execution execute_market_sell(const Snapshot& book, double qty, ImpactState state, const ImpactParams& params,
                              const FeeSchedule& fees, double liquidity_ref);

/// One-tick latency: a decision at `decision_index` settles at the next
/// snapshot, or is dropped when that would pass `last_index`.
std::optional<std::size_t> execution_index(std::size_t decision_index, std::size_t last_index) noexcept;

/// cash + inventory * mid, using the replayed (unshifted) mid.
double mark_to_market(const Snapshot& book, const PortfolioState& portfolio) noexcept;

/// Books a fill into the portfolio: cash += net proceeds, inventory -= filled.
void settle(PortfolioState& portfolio, const Fill& fill) noexcept;

}  // namespace lobsim

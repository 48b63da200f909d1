#include "lobsim/episode_env.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "lobsim/pnl.hpp"
#include "lobsim/snapshot_store.hpp"

namespace lobsim {

void EpisodeConfig::validate() const {
    if (!day || day->snapshots.empty()) throw std::invalid_argument("episode: no day data");
    if (horizon_s <= 0) throw std::invalid_argument("episode: horizon_s must be > 0");
    if (!std::isfinite(initial_btc) || !(initial_btc > 0.0)) throw std::invalid_argument("episode: initial_btc must be > 0");
    if (!(target_fraction >= 0.0 && target_fraction < 1.0)) {
        throw std::invalid_argument("episode: target_fraction must lie in [0, 1)");
    }
    if (!(trade_fraction > 0.0 && trade_fraction <= 1.0)) {
        throw std::invalid_argument("episode: trade_fraction must lie in (0, 1]");
    }
    if (!sell_only) throw std::invalid_argument("episode: only sell-only liquidation is supported");
}

bool window_fits(const DayBook& day, std::size_t start, int horizon_s) {
    if (start >= day.size() || horizon_s <= 0) return false;
    const std::int64_t end_ns = day[start].timestamp_ns + static_cast<std::int64_t>(horizon_s) * kNanosPerSecond;
    return end_ns <= day.snapshots.back().timestamp_ns + kSnapshotIntervalNs;
}

EpisodeWindow episode_window(const DayBook& day, std::size_t start, int horizon_s) {
    if (!window_fits(day, start, horizon_s)) {
        throw std::out_of_range("episode window [" + std::to_string(start) + ", +" + std::to_string(horizon_s) +
                                "s) does not fit in day " + day.date.str());
    }
    const std::int64_t end_ns = day[start].timestamp_ns + static_cast<std::int64_t>(horizon_s) * kNanosPerSecond;
    const std::size_t end = end_ns > day.snapshots.back().timestamp_ns ? day.size() : index_at_or_after(day, end_ns);
    return {start, end};
}

std::optional<std::size_t> last_feasible_start(const DayBook& day, int horizon_s) {
    if (day.snapshots.empty() || horizon_s <= 0) return std::nullopt;
    const std::int64_t latest = day.snapshots.back().timestamp_ns + kSnapshotIntervalNs -
                                static_cast<std::int64_t>(horizon_s) * kNanosPerSecond;
    const auto& s = day.snapshots;
    const auto it = std::upper_bound(s.begin(), s.end(), latest,
                                     [](std::int64_t v, const Snapshot& snap) { return v < snap.timestamp_ns; });
    if (it == s.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - s.begin()) - 1;
}

double compute_reward(const Fill& fill, double arrival_mid, const PortfolioState& portfolio, bool at_terminal,
                      double terminal_mid, const EpisodeConfig& cfg, const RewardParams& reward) {
    const double notional = cfg.initial_btc * arrival_mid;
    double r = (fill.net_proceeds() - fill.filled_qty * arrival_mid) / notional;
    if (at_terminal) {
        const double residual = portfolio.inventory;
        r += residual * (terminal_mid - arrival_mid) / notional;
        const double residual_fraction = residual / cfg.initial_btc;
        r -= reward.inventory_penalty * std::max(0.0, residual_fraction - cfg.target_fraction);
    }
    return r;
}

Environment::Environment(EngineParams engine, RewardParams reward) : engine_(engine), reward_(reward) {
    engine_.fees.validate();
    engine_.impact.validate();
    if (!std::isfinite(reward_.inventory_penalty) || reward_.inventory_penalty < 0.0) {
        throw std::invalid_argument("inventory_penalty must be finite and >= 0");
    }
}

Observation Environment::reset(const EpisodeConfig& cfg) {
    cfg.validate();
    cfg_ = cfg;
    window_ = episode_window(*cfg_.day, cfg_.start_index, cfg_.horizon_s);
    current_ = window_.begin;
    steps_ = 0;
    fills_ = 0;
    portfolio_ = {0.0, cfg_.initial_btc};
    const Snapshot& first = (*cfg_.day)[current_];
    impact_ = {0.0, first.timestamp_ns};
    arrival_mid_ = mid_price(first);
    cumulative_reward_ = 0.0;
    degeneracies_ = 0;
    active_ = true;
    started_ = true;
    DegeneracyFlags flags = kNone;
    return observe(flags);
}

Observation Environment::observe(DegeneracyFlags& flags) const {
    const DayBook& day = *cfg_.day;
    const Snapshot& cur = day[current_];
    const Snapshot* prev = current_ > window_.begin ? &day[current_ - 1] : nullptr;

    Observation o{};
    const double mid = mid_price(cur);
    for (std::size_t i = 0; i < kDepth; ++i) {
        o[obs::kBidPrice + i] = cur.bids[i].price / mid;
        o[obs::kBidSize + i] = cur.bids[i].size;
        o[obs::kAskPrice + i] = cur.asks[i].price / mid;
        o[obs::kAskSize + i] = cur.asks[i].size;
    }
    const IndicatorResult ind = compute_indicators(prev, cur);
    const auto values = ind.values.to_array();
    std::copy(values.begin(), values.end(), o.begin() + obs::kIndicators);
    const double total = static_cast<double>(window_.length());
    o[obs::kTimeToGo] = std::clamp((total - static_cast<double>(steps_)) / total, 0.0, 1.0);
    o[obs::kInventory] = std::clamp(portfolio_.inventory / cfg_.initial_btc, 0.0, 1.0);
    flags = ind.flags;
    return o;
}

StepResult Environment::step(double action) {
    if (!std::isfinite(action)) throw std::invalid_argument("step: action must be finite");
    const double fraction = std::clamp(action, 0.0, cfg_.trade_fraction);
    return step_quantity(fraction * portfolio_.inventory);
}

StepResult Environment::step_quantity(double qty) {
    if (!active_) throw std::logic_error("step called on a finished or unstarted episode");
    if (!std::isfinite(qty) || qty < 0.0) throw std::invalid_argument("step: quantity must be finite and >= 0");
    qty = std::min(qty, portfolio_.inventory);

    const DayBook& day = *cfg_.day;
    StepResult r;
    r.info.decision_index = current_;
    r.info.fill.requested_qty = qty;
    r.info.execution_index = execution_index(current_, window_.last());

    if (r.info.execution_index) {
        const Snapshot& book = day[*r.info.execution_index];
        impact_ = decay_impact(impact_, engine_.impact, book.timestamp_ns);
        const Execution ex =
            execute_market_sell(book, qty, impact_, engine_.impact, engine_.fees, total_bid_size(book));
        impact_ = ex.impact;
        settle(portfolio_, ex.fill);
        if (ex.fill.filled_qty > 0.0) ++fills_;
        r.info.fill = ex.fill;
        current_ = *r.info.execution_index;
    }
    ++steps_;

    const bool terminal = !r.info.execution_index.has_value();
    const double terminal_mid = mid_price(day[window_.last()]);
    r.reward = compute_reward(r.info.fill, arrival_mid_, portfolio_, terminal, terminal_mid, cfg_, reward_);
    cumulative_reward_ += r.reward;
    r.done = terminal;
    if (terminal) active_ = false;

    r.observation = observe(r.info.flags);
    DegeneracyFlags counted = r.info.flags;
    if (current_ == window_.begin) counted &= ~(kOfiZero | kDeltasFirst);
    degeneracies_ += static_cast<std::uint64_t>(std::popcount(counted));
    return r;
}

EpisodeOutcome Environment::outcome() const {
    if (!started_ || active_) throw std::logic_error("outcome requested before the episode finished");
    const double final_mid = mid_price((*cfg_.day)[window_.last()]);
    EpisodeOutcome o;
    o.pnl_percent = pnl_percent(portfolio_.cash, portfolio_.inventory, final_mid, arrival_mid_, cfg_.initial_btc);
    o.cumulative_reward = cumulative_reward_;
    o.fills = fills_;
    o.steps = steps_;
    o.residual_fraction = portfolio_.inventory / cfg_.initial_btc;
    o.cash = portfolio_.cash;
    o.inventory = portfolio_.inventory;
    o.arrival_mid = arrival_mid_;
    o.final_mid = final_mid;
    o.degeneracies = degeneracies_;
    return o;
}

}  // namespace lobsim

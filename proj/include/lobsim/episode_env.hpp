#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "lobsim/book.hpp"
#include "lobsim/exec_engine.hpp"
#include "lobsim/indicators.hpp"

namespace lobsim {

/// Observation layout (93 entries):
///   [0, 20)   bid prices / mid, best first
///   [20, 40)  bid sizes (BTC)
///   [40, 60)  ask prices / mid, best first
///   [60, 80)  ask sizes (BTC)
///   [80, 91)  indicators in IndicatorVector order
///   91        time-to-go fraction
///   92        inventory fraction
namespace obs {
inline constexpr std::size_t kBidPrice = 0;
inline constexpr std::size_t kBidSize = 20;
inline constexpr std::size_t kAskPrice = 40;
inline constexpr std::size_t kAskSize = 60;
inline constexpr std::size_t kIndicators = 80;
inline constexpr std::size_t kTimeToGo = 91;
inline constexpr std::size_t kInventory = 92;
inline constexpr std::size_t kSize = 93;

inline constexpr std::size_t kDeltaMid = kIndicators + 9;
}  // namespace obs

using Observation = std::array<double, obs::kSize>;

struct EpisodeConfig {
    DayBookPtr day;
    std::size_t start_index = 0;
    int horizon_s = 3600;
    double initial_btc = 1.0;
    /// Fraction of the initial inventory allowed to remain at the deadline.
    double target_fraction = 0.0;
    /// Per-step cap on the fraction of remaining inventory sold.
    double trade_fraction = 0.1;
    bool sell_only = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RewardParams {
    double inventory_penalty = 0.01;
};

/// Snapshot index range [begin, end) covered by an episode: every snapshot
/// with timestamp in [t_start, t_start + horizon).
struct EpisodeWindow {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - begin; }
    std::size_t last() const noexcept { return end - 1; }
};

/// True when the day covers the full horizon from `start`, i.e.
/// t_start + horizon <= t_last + one snapshot interval.
bool window_fits(const DayBook& day, std::size_t start, int horizon_s);

/// Throws std::out_of_range when the window does not fit.
EpisodeWindow episode_window(const DayBook& day, std::size_t start, int horizon_s);

/// Largest start index whose window fits, if any.
std::optional<std::size_t> last_feasible_start(const DayBook& day, int horizon_s);

struct StepInfo {
    Fill fill;
    std::size_t decision_index = 0;
    /// Empty when the order was dropped (decision at the last snapshot).
    std::optional<std::size_t> execution_index;
    DegeneracyFlags flags = kNone;
};

struct StepResult {
    Observation observation{};
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

struct EpisodeOutcome {
    double pnl_percent = 0.0;
    double cumulative_reward = 0.0;
    std::size_t fills = 0;
    std::size_t steps = 0;
    double residual_fraction = 0.0;
    double cash = 0.0;
    double inventory = 0.0;
    double arrival_mid = 0.0;
    double final_mid = 0.0;
    std::uint64_t degeneracies = 0;
};

/// Reward for one step, normalized by initial notional at the arrival mid:
///   (net proceeds - filled * arrival_mid) / (initial_btc * arrival_mid)
/// At the terminal step additionally
///   + residual * (terminal_mid - arrival_mid) / (initial_btc * arrival_mid)
///   - inventory_penalty * max(0, residual_fraction - target_fraction)
double compute_reward(const Fill& fill, double arrival_mid, const PortfolioState& portfolio, bool at_terminal,
                      double terminal_mid, const EpisodeConfig& cfg, const RewardParams& reward);

/// Fixed-horizon sell-only liquidation over one replay window. Each step
/// is one snapshot: the decision taken at snapshot i settles at i+1; the
/// decision at the window's last snapshot is dropped and ends the episode.
class Environment {
public:
    explicit Environment(EngineParams engine, RewardParams reward = {});

    Observation reset(const EpisodeConfig& cfg);

    /// Sells clip(action, 0, trade_fraction) of the remaining inventory.
    StepResult step(double action);

    /// Sells an absolute quantity (capped at inventory). Used by schedule
    /// baselines so they bypass the per-step fraction cap but share every
    /// other friction with policy steps.
    StepResult step_quantity(double qty);

    bool active() const noexcept { return active_; }
    std::size_t steps_taken() const noexcept { return steps_; }
    std::size_t episode_length() const noexcept { return window_.length(); }
    const EpisodeWindow& window() const noexcept { return window_; }
    std::size_t current_index() const noexcept { return current_; }
    const PortfolioState& portfolio() const noexcept { return portfolio_; }
    const ImpactState& impact() const noexcept { return impact_; }
    double arrival_mid() const noexcept { return arrival_mid_; }
    const EpisodeConfig& config() const noexcept { return cfg_; }
    const EngineParams& engine() const noexcept { return engine_; }

    /// Summary of the finished episode. Throws while the episode is active.
    EpisodeOutcome outcome() const;

private:
    Observation observe(DegeneracyFlags& flags) const;

    EngineParams engine_;
    RewardParams reward_;
    EpisodeConfig cfg_;
    EpisodeWindow window_;
    std::size_t current_ = 0;
    std::size_t steps_ = 0;
    std::size_t fills_ = 0;
    PortfolioState portfolio_;
    ImpactState impact_;
    double arrival_mid_ = 0.0;
    double cumulative_reward_ = 0.0;
    std::uint64_t degeneracies_ = 0;
    bool active_ = false;
    bool started_ = false;
};

}  // namespace lobsim

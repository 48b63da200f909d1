#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lobsim/episode_env.hpp"

namespace lobsim {

/// Per-step child order sizes (BTC).
using Schedule = std::vector<double>;

/// Equal slices Q/N. Throws on N == 0 or Q < 0.
Schedule twap_schedule(double total_qty, std::size_t steps);

struct VwapLikeSchedule {
    Schedule schedule;
    /// Set when every weight was zero and the allocation fell back to uniform.
    bool uniform_fallback = false;
};

/// Allocates Q in proportion to displayed bid-side size over the top `levels`
/// at each decision snapshot of [start, start + steps). A snapshot whose
/// summed size is zero falls back to bid notional / mid. Weights at step t
/// read only snapshot start + t; normalization spans the whole window.
VwapLikeSchedule vwap_like_schedule(const DayBook& day, std::size_t start, std::size_t steps, double total_qty,
                                    std::size_t levels = kDepth);

/// Liquidation target (1 - target_fraction) * initial_btc.
double liquidation_target(const EpisodeConfig& cfg) noexcept;

/// Submits q_t at step t as a market sell with the same latency, fees and
/// impact as policy steps. Unfilled remainders are not rolled over. The
/// schedule length must equal the episode length.
EpisodeOutcome run_schedule(std::span<const double> schedule, const EpisodeConfig& cfg, const EngineParams& engine,
                            const RewardParams& reward = {});

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values) noexcept;

}  // namespace lobsim

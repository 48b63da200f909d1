#include "lobsim/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace lobsim {

double compensated_sum(std::span<const double> values) noexcept {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

Schedule twap_schedule(double total_qty, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("twap_schedule: N must be >= 1");
    if (!std::isfinite(total_qty) || total_qty < 0.0) throw std::invalid_argument("twap_schedule: Q must be >= 0");
    return Schedule(steps, total_qty / static_cast<double>(steps));
}

VwapLikeSchedule vwap_like_schedule(const DayBook& day, std::size_t start, std::size_t steps, double total_qty,
                                    std::size_t levels) {
    if (steps == 0) throw std::invalid_argument("vwap_like_schedule: N must be >= 1");
    if (start + steps > day.size()) throw std::out_of_range("vwap_like_schedule: window exceeds day");
    if (levels < 1 || levels > kDepth) throw std::invalid_argument("vwap_like_schedule: levels must be in [1, 20]");
    if (!std::isfinite(total_qty) || total_qty < 0.0) throw std::invalid_argument("vwap_like_schedule: Q must be >= 0");

    std::vector<double> weights(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const Snapshot& s = day[start + t];
        double size = 0.0;
        double notional = 0.0;
        for (std::size_t l = 0; l < levels; ++l) {
            size += s.bids[l].size;
            notional += s.bids[l].size * s.bids[l].price;
        }
        double w = size;
        if (!(std::isfinite(w) && w > 0.0)) w = notional / mid_price(s);
        weights[t] = (std::isfinite(w) && w > 0.0) ? w : 0.0;
    }

    VwapLikeSchedule out;
    const double total_weight = compensated_sum(weights);
    if (!(total_weight > 0.0)) {
        out.uniform_fallback = true;
        out.schedule = twap_schedule(total_qty, steps);
        return out;
    }
    out.schedule.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) out.schedule[t] = total_qty * (weights[t] / total_weight);
    return out;
}

double liquidation_target(const EpisodeConfig& cfg) noexcept {
    return (1.0 - cfg.target_fraction) * cfg.initial_btc;
}

EpisodeOutcome run_schedule(std::span<const double> schedule, const EpisodeConfig& cfg, const EngineParams& engine,
                            const RewardParams& reward) {
    Environment env(engine, reward);
    env.reset(cfg);
    if (schedule.size() != env.episode_length()) {
        throw std::invalid_argument("run_schedule: schedule has " + std::to_string(schedule.size()) +
                                    " steps, episode has " + std::to_string(env.episode_length()));
    }
    for (double q : schedule) {
        if (env.step_quantity(q).done) break;
    }
    return env.outcome();
}

}  // namespace lobsim

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lobsim/baselines.hpp"
#include "lobsim/episode_env.hpp"
#include "lobsim/normalizer.hpp"
#include "lobsim/pnl.hpp"
#include "lobsim/policy.hpp"

namespace lobsim {

enum class Method { rl, twap, vwap };
const char* method_name(Method m) noexcept;
Method parse_method(std::string_view name);

struct EpisodeResult {
    Date day;
    int episode_id = 0;
    std::size_t start_index = 0;
    int horizon_s = 0;
    Method method = Method::rl;
    double pnl_percent = 0.0;
    double cum_reward = 0.0;
    std::size_t fills = 0;
    double residual_fraction = 0.0;

    bool operator==(const EpisodeResult&) const = default;
};

/// One paired difference per day: policy score minus baseline score.
struct DailyGapSeries {
    int horizon_s = 0;
    std::string baseline;
    std::vector<Date> days;
    std::vector<double> gaps;

    std::size_t size() const noexcept { return gaps.size(); }
};

enum class StartPlacement { even, jitter };

/// k distinct start indices whose windows fit in the day. `even` places
/// start i at floor(i * F / k) where F is the last feasible start; `jitter`
/// draws one seeded uniform index inside each of those k strata. Throws
/// std::out_of_range when the day cannot host k distinct windows.
std::vector<std::size_t> select_starts(const DayBook& day, int horizon_s, std::size_t k, std::uint64_t seed,
                                       StartPlacement placement = StartPlacement::even);

struct EvalSettings {
    EngineParams engine;
    RewardParams reward;
    double initial_btc = 1.0;
    double target_fraction = 0.0;
    double trade_fraction = 0.1;
    std::size_t k_starts = 10;
    std::uint64_t seed = 0;
    StartPlacement placement = StartPlacement::even;
    std::array<Method, 3> method_order = {Method::rl, Method::twap, Method::vwap};
};

/// Builds a fresh policy for one episode given its derived seed.
using PolicyFactory = std::function<std::unique_ptr<Policy>(std::uint64_t episode_seed)>;

/// Seed for episode `episode_id` of (day, horizon).
std::uint64_t episode_seed(std::uint64_t seed, Date day, int horizon_s, int episode_id) noexcept;

/// Runs the policy and both baselines on every selected start of one day.
/// Returns 3k rows sorted by (episode_id, method). Episodes run in
/// parallel; the policy factory must therefore hand out independent
/// policies. Any failed episode fails the whole day.
std::vector<EpisodeResult> run_day(const DayBookPtr& day, int horizon_s, const PolicyFactory& policy,
                                   const EvalSettings& settings, const NormalizerStats* frozen = nullptr);

namespace serial {
std::vector<EpisodeResult> run_day(const DayBookPtr& day, int horizon_s, const PolicyFactory& policy,
                                   const EvalSettings& settings, const NormalizerStats* frozen = nullptr);
}

enum class DailyStatistic { mean, median };

struct DailyScore {
    Date day;
    int horizon_s = 0;
    double rl = 0.0;
    double twap = 0.0;
    double vwap = 0.0;

    double gap_twap() const noexcept { return rl - twap; }
    double gap_vwap() const noexcept { return rl - vwap; }
};

struct DailyAggregation {
    std::vector<DailyScore> scores;          ///< sorted by (horizon, day)
    std::vector<DailyGapSeries> gap_series;  ///< per horizon: TWAP then VWAP
};

/// Collapses episode rows to one score per (day, horizon, method) and forms
/// the paired gaps. Throws when a (day, horizon) lacks a method or the
/// methods do not share the same start set.
DailyAggregation aggregate_daily(std::span<const EpisodeResult> rows, DailyStatistic statistic);

double median_of(std::vector<double> values);

// CSV interchange.
inline constexpr const char* kEpisodeCsvHeader =
    "day,episode_id,start_index,horizon_s,method,pnl_percent,cum_reward,fills,residual_fraction";
inline constexpr const char* kDailyCsvHeader = "day,horizon_s,rl,twap,vwap,gap_twap,gap_vwap";

void write_episode_csv(std::span<const EpisodeResult> rows, const std::filesystem::path& path);
std::vector<EpisodeResult> read_episode_csv(const std::filesystem::path& path);
void write_daily_csv(std::span<const DailyScore> scores, const std::filesystem::path& path);
std::vector<DailyScore> read_daily_csv(const std::filesystem::path& path);

/// Gap series reconstructed from per-day scores.
std::vector<DailyGapSeries> gaps_from_scores(std::span<const DailyScore> scores);

/// "episodes_H3600_k10.csv" etc.
std::string episode_csv_name(int horizon_s, std::size_t k);
std::string daily_csv_name(int horizon_s, std::size_t k);

}  // namespace lobsim

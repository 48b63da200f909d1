#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lobsim/episode_env.hpp"
#include "lobsim/normalizer.hpp"

namespace lobsim {

struct PolicyInput {
    const Observation& raw;
    /// Frozen-normalized observation, or the raw values when no stats are loaded.
    std::span<const double> normalized;
    std::size_t step = 0;
    std::size_t episode_length = 0;
};

/// Maps observations to a scalar action; the environment clips it to
/// [0, trade_fraction].
class Policy {
public:
    virtual ~Policy() = default;
    virtual void begin_episode(const EpisodeConfig& /*cfg*/) {}
    virtual double act(const PolicyInput& input) = 0;
    virtual void end_episode(const EpisodeOutcome& /*outcome*/) {}
};

/// Uniform actions in [-1, 1]; about half the steps hold after clipping.
class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : eng_(seed) {}
    double act(const PolicyInput& input) override;

private:
    std::mt19937_64 eng_;
};

/// Test oracle for end-to-end checks, not a trading claim. Paces sales so
/// the inventory would be gone by the last executable step, selling
/// `boost` times that pace on snapshots where the mid just ticked up and
/// holding otherwise.
class ThresholdOraclePolicy final : public Policy {
public:
    explicit ThresholdOraclePolicy(double boost = 2.0) : boost_(boost) {}
    double act(const PolicyInput& input) override;

private:
    double boost_;
};

/// Sells the remaining inventory evenly over the executable steps.
class TwapPacePolicy final : public Policy {
public:
    double act(const PolicyInput& input) override;
};

/// Sells in proportion to the book-weighted schedule of the episode window,
/// expressed as a fraction of what is left to sell.
class VwapPacePolicy final : public Policy {
public:
    void begin_episode(const EpisodeConfig& cfg) override;
    double act(const PolicyInput& input) override;

private:
    std::vector<double> remaining_weight_;  // suffix sums over executable steps
    std::vector<double> weight_;
};

/// Policy served by an external process over line-delimited JSON on its
/// stdin/stdout. Per episode the core writes
///   {"kind":"reset", "day":..., "start_index":..., "horizon_s":...}
/// then for every decision
///   {"kind":"obs", "obs":[93 numbers], "step":k}
/// and expects back
///   {"kind":"act", "action":x}
/// Episodes end with {"kind":"done", "pnl_percent":..., "cumulative_reward":...}.
class ExternalPolicy final : public Policy {
public:
    explicit ExternalPolicy(const std::string& command);
    ~ExternalPolicy() override;
    ExternalPolicy(const ExternalPolicy&) = delete;
    ExternalPolicy& operator=(const ExternalPolicy&) = delete;

    void begin_episode(const EpisodeConfig& cfg) override;
    double act(const PolicyInput& input) override;
    void end_episode(const EpisodeOutcome& outcome) override;

private:
    struct Process;
    std::unique_ptr<Process> proc_;
};

/// Runs one full episode. When `frozen` is given, the policy receives
/// normalized observations; the stats are never updated.
EpisodeOutcome run_policy(Policy& policy, Environment& env, const EpisodeConfig& cfg,
                          const NormalizerStats* frozen = nullptr);

/// Streams every observation of a policy-driven episode into fitting stats.
EpisodeOutcome fit_observations(Policy& policy, Environment& env, const EpisodeConfig& cfg,
                                NormalizerStats& fitting);

}  // namespace lobsim

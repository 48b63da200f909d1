#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobsim/eval_protocol.hpp"
#include "lobsim/stats.hpp"

namespace lobsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PolicySource { twap, vwap, random, oracle, bridge };
const char* policy_source_name(PolicySource p) noexcept;
PolicySource parse_policy_source(std::string_view name);

/// Everything a run depends on. Serialized as one flat JSON object with a
/// schema_version key. Scalar keys can be overridden from the environment
/// as LOBSIM_<KEY> (upper case); the effective precedence is command-line
/// flag, then environment, then file, then the defaults below.
struct RunConfig {
    static constexpr int kSchemaVersion = 1;

    std::string data_dir = "data";
    std::string date_from;  ///< YYYYMMDD, empty = unbounded
    std::string date_to;
    std::vector<int> horizons = {1800, 3600, 7200};
    std::size_t k_starts = 10;
    std::uint64_t seed = 0;
    std::string placement = "even";

    double taker_fee_bps = 10.0;
    double maker_rebate_bps = 0.0;
    double impact_k = 0.3;
    double impact_exponent = 0.5;
    double impact_half_life_s = 60.0;

    double initial_btc = 1.0;
    double target_fraction = 0.0;
    double trade_fraction = 0.1;
    double inventory_penalty = 0.01;

    std::string policy = "oracle";
    std::string policy_command;  ///< external process for policy = bridge
    double oracle_boost = 2.0;
    std::string norm_stats;  ///< frozen NormalizerStats file, optional

    std::string output_dir = "out";
    std::string aggregate = "mean";
    double winsorize = 0.0;
    double alpha = 0.05;
    std::string alternative = "greater";
    std::size_t bootstrap_resamples = 10000;
    bool impact_sweep = false;

    void validate() const;

    EngineParams engine() const;
    EvalSettings eval_settings() const;
    stats::StatsSettings stats_settings() const;
    DailyStatistic daily_statistic() const;
    PolicySource policy_source() const { return parse_policy_source(policy); }
    std::optional<Date> first_date() const;
    std::optional<Date> last_date() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Applies the keys present in `j` on top of `base`. Unknown keys and type
/// mismatches throw ConfigError.
RunConfig apply_json(const nlohmann::json& j, RunConfig base = {});

RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Applies LOBSIM_<KEY> variables taken from `env` (name -> value).
RunConfig apply_env(const std::map<std::string, std::string>& env, RunConfig base);
/// Collects LOBSIM_* from the process environment.
std::map<std::string, std::string> process_env();

/// Compact, key-sorted dump used for hashing.
std::string canonical_config(const RunConfig& cfg);

struct InputFile {
    std::string path;
    std::string sha256;
};

struct SkippedDay {
    std::string day;
    int horizon_s = 0;
    std::string reason;
};

/// Reproducibility record echoed by every run. Contains no clock time so
/// identical runs produce identical manifests.
struct Manifest {
    std::string code_version;
    RunConfig config;
    std::vector<InputFile> inputs;
    std::vector<SkippedDay> skipped;
    std::string norm_stats_sha256;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

const char* code_version() noexcept;

}  // namespace lobsim

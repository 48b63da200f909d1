#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lobsim/eval_protocol.hpp"
#include "lobsim/run_config.hpp"
#include "lobsim/snapshot_store.hpp"
#include "lobsim/stats.hpp"
#include "lobsim/synthetic.hpp"

namespace lobsim {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitStats = 4,
};

/// Runs `body`, mapping ConfigError, DataError and StatsError (and
/// anything else) to distinct exit codes. Messages go to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

// ingest

struct IngestResult {
    std::vector<std::filesystem::path> written;
    std::vector<std::pair<std::filesystem::path, QualityReport>> reports;
    std::vector<std::pair<std::filesystem::path, std::string>> failures;
};

/// Re-validates day files (or every day file found in given directories)
/// and writes canonical copies to `out_dir`. Failing files are collected,
/// not fatal.
IngestResult ingest(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                    DayFormat format, std::ostream& log);
int cmd_ingest(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
               DayFormat format, std::ostream& out, std::ostream& err);

// eval-compare

/// Day files in `dir` named YYYYMMDD.csv / YYYYMMDD.lobd, sorted by date and
/// restricted to [first, last] when given.
std::vector<std::filesystem::path> list_day_files(const std::filesystem::path& dir, std::optional<Date> first,
                                                  std::optional<Date> last);

PolicyFactory make_policy_factory(const RunConfig& cfg);

struct SweepPoint {
    std::string param;  ///< "impact_k" or "impact_half_life_s"
    double factor = 1.0;
    double impact_k = 0.0;
    double impact_half_life_s = 0.0;
    int horizon_s = 0;
    std::string baseline;
    std::size_t n_days = 0;
    double mean_gap = 0.0;  ///< percent
};

inline constexpr const char* kSweepCsvHeader =
    "param,factor,impact_k,impact_half_life_s,horizon_s,baseline,n_days,mean_gap";

struct EvalCompareResult {
    std::vector<EpisodeResult> rows;  ///< all horizons, sorted by (horizon, day, episode, method)
    DailyAggregation daily;
    Manifest manifest;
    std::vector<SweepPoint> sweep;
    std::vector<std::filesystem::path> written;
};

EvalCompareResult eval_compare(const RunConfig& cfg, std::ostream& log);
int cmd_eval_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// stats-eval

struct StatsEvalResult {
    std::vector<DailyScore> scores;
    std::vector<stats::TestResult> results;
    std::string csv;
    std::string markdown;
    std::vector<std::filesystem::path> written;
};

/// Accepts per-episode CSVs (aggregated with cfg.aggregate) or per-day CSVs.
StatsEvalResult stats_eval(const std::vector<std::filesystem::path>& inputs, const RunConfig& cfg, std::ostream& log);
int cmd_stats_eval(const std::vector<std::filesystem::path>& inputs, const RunConfig& cfg, std::ostream& out,
                   std::ostream& err);

// plot

int cmd_plot(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
             std::ostream& out, std::ostream& err);

// bridge-serve

enum class Transport { stdio, socket };

struct ServeOptions {
    Transport transport = Transport::stdio;
    std::uint16_t port = 0;
    std::size_t max_connections = 0;
};

int cmd_bridge_serve(const RunConfig& cfg, const ServeOptions& options, std::istream& in, std::ostream& out,
                     std::ostream& err);

// synth / fit-norm

int cmd_synth(const std::filesystem::path& dir, Date first, std::size_t days, const synthetic::MarketParams& params,
              std::uint64_t seed, DayFormat format, std::ostream& out, std::ostream& err);

/// Streams observations of cfg.policy over every day and start of the
/// configured range into fresh stats and saves them (frozen on reload).
NormalizerStats fit_norm(const RunConfig& cfg, const std::filesystem::path& stats_path, std::ostream& log);
int cmd_fit_norm(const RunConfig& cfg, const std::filesystem::path& stats_path, std::ostream& out, std::ostream& err);

}  // namespace lobsim

#include "lobsim/commands.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "lobsim/bridge.hpp"
#include "lobsim/csv.hpp"
#include "lobsim/hashing.hpp"
#include "lobsim/plot.hpp"
#include "lobsim/report.hpp"

namespace fs = std::filesystem;

namespace lobsim {

using nlohmann::json;

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const stats::StatsError& e) {
        err << "statistics error: " << e.what() << '\n';
        return kExitStats;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

namespace {

bool is_day_file(const fs::path& p) {
    const auto ext = p.extension();
    if (ext != ".csv" && ext != ".lobd") return false;
    try {
        Date::parse(p.stem().string());
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

std::string first_line(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    return std::string(csv::trim_eol(line));
}

void require_exists(const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " does not exist: " + p.string());
}

struct LoadedDays {
    std::vector<DayBookPtr> days;  // date order
    std::vector<SkippedDay> failed;
};

LoadedDays load_days(const std::vector<fs::path>& files) {
    std::vector<DayBookPtr> loaded(files.size());
    std::vector<std::string> errors(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            loaded[k] = std::make_shared<const DayBook>(load_day(files[k]).day);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    LoadedDays out;
    for (std::size_t k = 0; k < files.size(); ++k) {
        if (loaded[k]) {
            out.days.push_back(loaded[k]);
        } else {
            out.failed.push_back({date_from_path(files[k]).str(), 0, "load failed: " + errors[k]});
        }
    }
    return out;
}

std::vector<InputFile> hash_inputs(const std::vector<fs::path>& files) {
    std::vector<InputFile> out(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = {files[k].string(), sha256_file(files[k])};
    }
    return out;
}

std::optional<NormalizerStats> load_frozen(const RunConfig& cfg, std::string* sha) {
    if (cfg.norm_stats.empty()) return std::nullopt;
    require_exists(cfg.norm_stats, "norm_stats file");
    if (sha != nullptr) *sha = sha256_file(cfg.norm_stats);
    try {
        return load_stats(cfg.norm_stats);
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------- ingest

IngestResult ingest(const std::vector<fs::path>& inputs, const fs::path& out_dir, DayFormat format, std::ostream& log) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        require_exists(in, "input");
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in)) {
                if (e.is_regular_file() && is_day_file(e.path())) files.push_back(e.path());
            }
        } else {
            files.push_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no day files to ingest");

    IngestResult result;
    fs::create_directories(out_dir);
    std::string quality = "file,rows_in,rows_kept,dup_ts,invalid_top,nonpositive_spread,price_band,unordered,values_clipped\n";
    for (const auto& f : files) {
        try {
            const LoadedDay loaded = load_day(f);
            const auto target = out_dir / day_file_name(loaded.day.date, format);
            write_day(loaded.day, target, format);
            const QualityReport& q = loaded.quality;
            quality += f.filename().string() + "," + std::to_string(q.rows_in) + "," + std::to_string(q.rows_kept) + "," +
                       std::to_string(q.rows_dropped_duplicate_ts) + "," + std::to_string(q.rows_dropped_invalid_top) +
                       "," + std::to_string(q.rows_dropped_nonpositive_spread) + "," +
                       std::to_string(q.rows_dropped_price_band) + "," + std::to_string(q.rows_dropped_unordered) + "," +
                       std::to_string(q.values_clipped) + "\n";
            log << f.string() << ": kept " << q.rows_kept << "/" << q.rows_in << " rows -> " << target.string() << '\n';
            result.written.push_back(target);
            result.reports.emplace_back(f, q);
        } catch (const std::exception& e) {
            result.failures.emplace_back(f, e.what());
        }
    }
    write_text_file(out_dir / "quality.csv", quality);
    return result;
}

int cmd_ingest(const std::vector<fs::path>& inputs, const fs::path& out_dir, DayFormat format, std::ostream& out,
               std::ostream& err) {
    return run_guarded(
        [&] {
            const IngestResult r = ingest(inputs, out_dir, format, out);
            out << r.written.size() << " file(s) written, " << r.failures.size() << " failed\n";
            if (r.failures.empty()) return static_cast<int>(kExitOk);
            err << "failed files:\n";
            for (const auto& [path, why] : r.failures) err << "  " << path.string() << ": " << why << '\n';
            return static_cast<int>(kExitData);
        },
        err);
}

// ---------------------------------------------------------- eval-compare

std::vector<fs::path> list_day_files(const fs::path& dir, std::optional<Date> first, std::optional<Date> last) {
    if (!fs::is_directory(dir)) throw ConfigError("data directory does not exist: " + dir.string());
    std::map<Date, fs::path> by_date;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || !is_day_file(e.path())) continue;
        const Date d = date_from_path(e.path());
        if ((first && d < *first) || (last && d > *last)) continue;
        if (!by_date.emplace(d, e.path()).second) {
            throw DataError("two files for day " + d.str() + " in " + dir.string());
        }
    }
    std::vector<fs::path> out;
    for (auto& [_, p] : by_date) out.push_back(p);
    return out;
}

PolicyFactory make_policy_factory(const RunConfig& cfg) {
    switch (cfg.policy_source()) {
        case PolicySource::twap:
            return [](std::uint64_t) { return std::make_unique<TwapPacePolicy>(); };
        case PolicySource::vwap:
            return [](std::uint64_t) { return std::make_unique<VwapPacePolicy>(); };
        case PolicySource::random:
            return [](std::uint64_t seed) { return std::make_unique<RandomPolicy>(seed); };
        case PolicySource::oracle: {
            const double boost = cfg.oracle_boost;
            return [boost](std::uint64_t) { return std::make_unique<ThresholdOraclePolicy>(boost); };
        }
        case PolicySource::bridge: {
            const std::string cmd = cfg.policy_command;
            return [cmd](std::uint64_t) { return std::make_unique<ExternalPolicy>(cmd); };
        }
    }
    throw ConfigError("unknown policy source");
}

namespace {

std::vector<EpisodeResult> run_all(const std::vector<DayBookPtr>& days, const std::vector<int>& horizons,
                                   const PolicyFactory& factory, const EvalSettings& settings,
                                   const NormalizerStats* frozen, std::vector<SkippedDay>* skipped,
                                   std::ostream* log) {
    std::vector<EpisodeResult> rows;
    for (int h : horizons) {
        std::size_t kept = 0;
        for (const auto& day : days) {
            try {
                select_starts(*day, h, settings.k_starts, settings.seed, settings.placement);
            } catch (const std::out_of_range& e) {
                if (skipped != nullptr) skipped->push_back({day->date.str(), h, e.what()});
                if (log != nullptr) *log << "skip " << day->date.str() << " H=" << h << ": " << e.what() << '\n';
                continue;
            }
            auto day_rows = run_day(day, h, factory, settings, frozen);
            rows.insert(rows.end(), day_rows.begin(), day_rows.end());
            ++kept;
        }
        if (kept == 0) throw DataError("no day survives at horizon " + std::to_string(h) + " s");
        if (log != nullptr) *log << "H=" << h << ": " << kept << " day(s), " << kept * settings.k_starts * 3 << " episodes\n";
    }
    return rows;
}

std::vector<EpisodeResult> rows_for(std::span<const EpisodeResult> rows, int h) {
    std::vector<EpisodeResult> out;
    for (const auto& r : rows) {
        if (r.horizon_s == h) out.push_back(r);
    }
    return out;
}

std::vector<DailyScore> scores_for(std::span<const DailyScore> scores, int h) {
    std::vector<DailyScore> out;
    for (const auto& s : scores) {
        if (s.horizon_s == h) out.push_back(s);
    }
    return out;
}

std::string num(double v) { return csv::format_double(v); }

}  // namespace

EvalCompareResult eval_compare(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto files = list_day_files(cfg.data_dir, cfg.first_date(), cfg.last_date());
    if (files.empty()) throw DataError("no day files in " + cfg.data_dir);

    EvalCompareResult result;
    Manifest& m = result.manifest;
    m.code_version = code_version();
    m.config = cfg;
    m.inputs = hash_inputs(files);
    auto frozen = load_frozen(cfg, &m.norm_stats_sha256);
    LoadedDays loaded = load_days(files);
    m.skipped = loaded.failed;
    for (const auto& s : loaded.failed) log << "skip " << s.day << ": " << s.reason << '\n';
    if (loaded.days.empty()) throw DataError("no day file could be loaded");

    std::vector<int> horizons = cfg.horizons;
    std::sort(horizons.begin(), horizons.end());
    const PolicyFactory factory = make_policy_factory(cfg);
    const EvalSettings settings = cfg.eval_settings();
    const NormalizerStats* frozen_ptr = frozen ? &*frozen : nullptr;

    result.rows = run_all(loaded.days, horizons, factory, settings, frozen_ptr, &m.skipped, &log);
    try {
        result.daily = aggregate_daily(result.rows, cfg.daily_statistic());
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }

    const fs::path out_dir = cfg.output_dir;
    auto record = [&](const fs::path& p) {
        result.written.push_back(p);
        m.outputs.push_back(p.filename().string());
    };
    for (int h : horizons) {
        const auto ep_path = out_dir / episode_csv_name(h, cfg.k_starts);
        write_episode_csv(rows_for(result.rows, h), ep_path);
        record(ep_path);
        const auto daily_path = out_dir / daily_csv_name(h, cfg.k_starts);
        write_daily_csv(scores_for(result.daily.scores, h), daily_path);
        record(daily_path);
    }

    if (cfg.impact_sweep) {
        auto add_points = [&](const char* param, double factor, const EngineParams& engine,
                              const DailyAggregation& agg) {
            for (const auto& series : agg.gap_series) {
                result.sweep.push_back({param, factor, engine.impact.coeff, engine.impact.half_life_s, series.horizon_s,
                                        series.baseline, series.size(), stats::mean(series.gaps)});
            }
        };
        for (const char* param : {"impact_k", "impact_half_life_s"}) {
            for (double factor : {0.5, 1.0, 2.0}) {
                EvalSettings s = settings;
                if (std::string_view(param) == "impact_k") {
                    s.engine.impact.coeff *= factor;
                } else {
                    s.engine.impact.half_life_s *= factor;
                }
                if (factor == 1.0) {
                    add_points(param, factor, s.engine, result.daily);
                    continue;
                }
                log << "sweep " << param << " x" << factor << '\n';
                const auto rows = run_all(loaded.days, horizons, factory, s, frozen_ptr, nullptr, nullptr);
                add_points(param, factor, s.engine, aggregate_daily(rows, cfg.daily_statistic()));
            }
        }
        std::string csv = std::string(kSweepCsvHeader) + "\n";
        for (const auto& p : result.sweep) {
            csv += p.param + "," + num(p.factor) + "," + num(p.impact_k) + "," + num(p.impact_half_life_s) + "," +
                   std::to_string(p.horizon_s) + "," + p.baseline + "," + std::to_string(p.n_days) + "," +
                   num(p.mean_gap) + "\n";
        }
        const auto sweep_path = out_dir / "impact_sweep.csv";
        write_text_file(sweep_path, csv);
        record(sweep_path);
    }

    const std::string manifest_text = m.to_json().dump(2) + "\n";
    write_text_file(out_dir / "manifest.json", manifest_text);
    result.written.push_back(out_dir / "manifest.json");
    log << manifest_text;
    return result;
}

int cmd_eval_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(
        [&] {
            const auto r = eval_compare(cfg, out);
            out << r.rows.size() << " episode rows written to " << cfg.output_dir << '\n';
            return static_cast<int>(kExitOk);
        },
        err);
}

// ------------------------------------------------------------- stats-eval

namespace {

std::vector<DailyScore> load_scores(const std::vector<fs::path>& inputs, DailyStatistic statistic) {
    if (inputs.empty()) throw ConfigError("no input CSV given");
    std::vector<EpisodeResult> rows;
    std::vector<DailyScore> scores;
    for (const auto& p : inputs) {
        require_exists(p, "input");
        const std::string header = first_line(p);
        try {
            if (header == kEpisodeCsvHeader) {
                auto r = read_episode_csv(p);
                rows.insert(rows.end(), r.begin(), r.end());
            } else if (header == kDailyCsvHeader) {
                auto s = read_daily_csv(p);
                scores.insert(scores.end(), s.begin(), s.end());
            } else {
                throw DataError(p.string() + ": not a per-episode or per-day CSV");
            }
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }
    if (!rows.empty()) {
        try {
            const auto agg = aggregate_daily(rows, statistic);
            scores.insert(scores.end(), agg.scores.begin(), agg.scores.end());
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what());
        }
    }
    std::sort(scores.begin(), scores.end(), [](const DailyScore& a, const DailyScore& b) {
        return std::tie(a.horizon_s, a.day) < std::tie(b.horizon_s, b.day);
    });
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].horizon_s == scores[i - 1].horizon_s && scores[i].day == scores[i - 1].day) {
            throw DataError("day " + scores[i].day.str() + " appears twice at horizon " +
                            std::to_string(scores[i].horizon_s));
        }
    }
    if (scores.empty()) throw DataError("inputs hold no rows");
    return scores;
}

}  // namespace

StatsEvalResult stats_eval(const std::vector<fs::path>& inputs, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    StatsEvalResult result;
    result.scores = load_scores(inputs, cfg.daily_statistic());
    const auto series = gaps_from_scores(result.scores);
    for (const auto& s : series) {
        if (s.size() < 2) {
            throw stats::StatsError("horizon " + std::to_string(s.horizon_s) + " has " + std::to_string(s.size()) +
                                    " day(s); at least 2 are needed");
        }
    }
    result.results = stats::evaluate(series, cfg.stats_settings());

    json manifest = json::object();
    manifest["code_version"] = code_version();
    manifest["config"] = to_json(cfg);
    manifest["config_sha256"] = sha256_hex(canonical_config(cfg));
    json in = json::array();
    for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    manifest["inputs"] = in;
    manifest["bootstrap"] = {{"resamples", cfg.bootstrap_resamples}, {"seed", cfg.seed},
                             {"substreams", "per (horizon, baseline), chunks of 256"}};

    result.csv = stats_csv(result.results);
    result.markdown = markdown_report(result.results, cfg.alpha, manifest.dump(2));

    const fs::path out_dir = cfg.output_dir;
    write_text_file(out_dir / "stats.csv", result.csv);
    write_text_file(out_dir / "report.md", result.markdown);
    write_daily_csv(result.scores, out_dir / "stats_daily.csv");
    result.written = {out_dir / "stats.csv", out_dir / "report.md", out_dir / "stats_daily.csv"};
    log << result.markdown;
    return result;
}

int cmd_stats_eval(const std::vector<fs::path>& inputs, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(
        [&] {
            stats_eval(inputs, cfg, out);
            return static_cast<int>(kExitOk);
        },
        err);
}

// ------------------------------------------------------------------- plot

int cmd_plot(const std::vector<fs::path>& inputs, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    return run_guarded(
        [&] {
            const auto scores = load_scores(inputs, DailyStatistic::mean);
            for (const auto& p : plot::write_plots(scores, out_dir)) out << p.string() << '\n';
            return static_cast<int>(kExitOk);
        },
        err);
}

// ----------------------------------------------------------- bridge-serve

int cmd_bridge_serve(const RunConfig& cfg, const ServeOptions& options, std::istream& in, std::ostream& out,
                     std::ostream& err) {
    return run_guarded(
        [&] {
            cfg.validate();
            const auto files = list_day_files(cfg.data_dir, cfg.first_date(), cfg.last_date());
            LoadedDays loaded = load_days(files);
            for (const auto& s : loaded.failed) err << "skip " << s.day << ": " << s.reason << '\n';
            if (loaded.days.empty()) throw DataError("no day files in " + cfg.data_dir);
            DayLibrary library;
            for (auto& d : loaded.days) library.add(d);
            const auto frozen = load_frozen(cfg, nullptr);
            const NormalizerStats* frozen_ptr = frozen ? &*frozen : nullptr;

            BridgeOptions bo;
            bo.engine = cfg.engine();
            bo.reward.inventory_penalty = cfg.inventory_penalty;
            bo.horizon_s = cfg.horizons.front();
            bo.initial_btc = cfg.initial_btc;
            bo.target_fraction = cfg.target_fraction;
            bo.trade_fraction = cfg.trade_fraction;

            if (options.transport == Transport::stdio) {
                BridgeSession session(library, bo, frozen_ptr);
                return serve_stream(in, out, session) == 0 ? static_cast<int>(kExitOk)
                                                           : static_cast<int>(kExitFailure);
            }
            serve_socket(
                options.port, [&] { return std::make_unique<BridgeSession>(library, bo, frozen_ptr); },
                options.max_connections,
                [&](std::uint16_t port) { err << "listening on 127.0.0.1:" << port << std::endl; });
            return static_cast<int>(kExitOk);
        },
        err);
}

// ------------------------------------------------------- synth / fit-norm

int cmd_synth(const fs::path& dir, Date first, std::size_t days, const synthetic::MarketParams& params,
              std::uint64_t seed, DayFormat format, std::ostream& out, std::ostream& err) {
    return run_guarded(
        [&] {
            try {
                params.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            for (const auto& p : synthetic::write_month(dir, first, days, params, seed, format)) out << p.string() << '\n';
            return static_cast<int>(kExitOk);
        },
        err);
}

NormalizerStats fit_norm(const RunConfig& cfg, const fs::path& stats_path, std::ostream& log) {
    cfg.validate();
    const auto files = list_day_files(cfg.data_dir, cfg.first_date(), cfg.last_date());
    LoadedDays loaded = load_days(files);
    if (loaded.days.empty()) throw DataError("no day files in " + cfg.data_dir);
    const PolicyFactory factory = make_policy_factory(cfg);
    const EvalSettings settings = cfg.eval_settings();
    Environment env(settings.engine, settings.reward);
    NormalizerStats st(obs::kSize);
    const int h = cfg.horizons.front();
    std::size_t episodes = 0;
    for (const auto& day : loaded.days) {
        std::vector<std::size_t> starts;
        try {
            starts = select_starts(*day, h, cfg.k_starts, cfg.seed, settings.placement);
        } catch (const std::out_of_range& e) {
            log << "skip " << day->date.str() << ": " << e.what() << '\n';
            continue;
        }
        for (std::size_t i = 0; i < starts.size(); ++i) {
            EpisodeConfig ec;
            ec.day = day;
            ec.start_index = starts[i];
            ec.horizon_s = h;
            ec.initial_btc = cfg.initial_btc;
            ec.target_fraction = cfg.target_fraction;
            ec.trade_fraction = cfg.trade_fraction;
            ec.seed = episode_seed(cfg.seed, day->date, h, static_cast<int>(i));
            auto policy = factory(ec.seed);
            fit_observations(*policy, env, ec, st);
            ++episodes;
        }
    }
    if (episodes == 0) throw DataError("no episode fits the horizon");
    save_stats(st, stats_path);
    log << "fitted on " << episodes << " episodes, " << st.count() << " observations -> " << stats_path.string()
        << " sha256 " << sha256_file(stats_path) << '\n';
    return st;
}

int cmd_fit_norm(const RunConfig& cfg, const fs::path& stats_path, std::ostream& out, std::ostream& err) {
    return run_guarded(
        [&] {
            fit_norm(cfg, stats_path, out);
            return static_cast<int>(kExitOk);
        },
        err);
}

}  // namespace lobsim

#include "lobsim/eval_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

#include "lobsim/csv.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

const char* method_name(Method m) noexcept {
    switch (m) {
        case Method::rl: return "RL";
        case Method::twap: return "TWAP";
        case Method::vwap: return "VWAP";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "RL") return Method::rl;
    if (name == "TWAP") return Method::twap;
    if (name == "VWAP") return Method::vwap;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<std::size_t> select_starts(const DayBook& day, int horizon_s, std::size_t k, std::uint64_t seed,
                                       StartPlacement placement) {
    if (k == 0) throw std::invalid_argument("select_starts: k must be >= 1");
    const auto last = last_feasible_start(day, horizon_s);
    if (!last) throw std::out_of_range("day " + day.date.str() + " is shorter than the horizon");
    const std::uint64_t span = *last;

    auto stratum_begin = [&](std::uint64_t i) { return static_cast<std::size_t>(i * span / k); };

    std::vector<std::size_t> starts(k);
    if (placement == StartPlacement::even) {
        for (std::size_t i = 0; i < k; ++i) starts[i] = stratum_begin(i);
    } else {
        std::mt19937_64 eng(rng::derive(rng::derive(seed, static_cast<std::uint64_t>(day.date.value())),
                                        (static_cast<std::uint64_t>(horizon_s) << 20) ^ k));
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t lo = stratum_begin(i);
            const std::size_t hi = i + 1 < k ? stratum_begin(i + 1) : static_cast<std::size_t>(span) + 1;
            starts[i] = hi > lo ? lo + rng::uniform_index(eng, hi - lo) : lo;
        }
    }
    if (std::adjacent_find(starts.begin(), starts.end()) != starts.end()) {
        throw std::out_of_range("day " + day.date.str() + " cannot host " + std::to_string(k) +
                                " distinct windows of " + std::to_string(horizon_s) + " s");
    }
    return starts;
}

std::uint64_t episode_seed(std::uint64_t seed, Date day, int horizon_s, int episode_id) noexcept {
    std::uint64_t s = rng::derive(seed, static_cast<std::uint64_t>(day.value()));
    s = rng::derive(s, static_cast<std::uint64_t>(horizon_s));
    return rng::derive(s, static_cast<std::uint64_t>(episode_id));
}

namespace {

std::size_t method_slot(Method m) { return static_cast<std::size_t>(m); }

EpisodeResult run_one(const DayBookPtr& day, int horizon_s, std::size_t start, int episode_id, Method method,
                      const PolicyFactory& factory, const EvalSettings& settings, const NormalizerStats* frozen) {
    EpisodeConfig cfg;
    cfg.day = day;
    cfg.start_index = start;
    cfg.horizon_s = horizon_s;
    cfg.initial_btc = settings.initial_btc;
    cfg.target_fraction = settings.target_fraction;
    cfg.trade_fraction = settings.trade_fraction;
    cfg.sell_only = true;
    cfg.seed = episode_seed(settings.seed, day->date, horizon_s, episode_id);

    EpisodeOutcome outcome;
    if (method == Method::rl) {
        auto policy = factory(cfg.seed);
        if (!policy) throw std::runtime_error("policy factory returned null");
        Environment env(settings.engine, settings.reward);
        outcome = run_policy(*policy, env, cfg, frozen);
    } else {
        const std::size_t steps = episode_window(*day, start, horizon_s).length();
        const double q = liquidation_target(cfg);
        const Schedule schedule =
            method == Method::twap ? twap_schedule(q, steps) : vwap_like_schedule(*day, start, steps, q).schedule;
        outcome = run_schedule(schedule, cfg, settings.engine, settings.reward);
    }

    EpisodeResult row;
    row.day = day->date;
    row.episode_id = episode_id;
    row.start_index = start;
    row.horizon_s = horizon_s;
    row.method = method;
    row.pnl_percent = outcome.pnl_percent;
    row.cum_reward = outcome.cumulative_reward;
    row.fills = outcome.fills;
    row.residual_fraction = outcome.residual_fraction;
    return row;
}

struct DayPlan {
    std::vector<std::size_t> starts;
    std::size_t tasks() const { return starts.size() * 3; }
};

DayPlan plan_day(const DayBookPtr& day, int horizon_s, const EvalSettings& settings) {
    if (!day) throw std::invalid_argument("run_day: null day");
    return {select_starts(*day, horizon_s, settings.k_starts, settings.seed, settings.placement)};
}

}  // namespace

std::vector<EpisodeResult> run_day(const DayBookPtr& day, int horizon_s, const PolicyFactory& policy,
                                   const EvalSettings& settings, const NormalizerStats* frozen) {
    const DayPlan plan = plan_day(day, horizon_s, settings);
    const auto n_tasks = static_cast<std::ptrdiff_t>(plan.tasks());
    std::vector<EpisodeResult> rows(plan.tasks());
    std::vector<std::exception_ptr> errors(plan.tasks());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < n_tasks; ++t) {
        const auto e = static_cast<std::size_t>(t) / 3;
        const Method m = settings.method_order[static_cast<std::size_t>(t) % 3];
        try {
            rows[e * 3 + method_slot(m)] =
                run_one(day, horizon_s, plan.starts[e], static_cast<int>(e), m, policy, settings, frozen);
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return rows;
}

namespace serial {

std::vector<EpisodeResult> run_day(const DayBookPtr& day, int horizon_s, const PolicyFactory& policy,
                                   const EvalSettings& settings, const NormalizerStats* frozen) {
    const DayPlan plan = plan_day(day, horizon_s, settings);
    std::vector<EpisodeResult> rows(plan.tasks());
    for (std::size_t e = 0; e < plan.starts.size(); ++e) {
        for (Method m : settings.method_order) {
            rows[e * 3 + method_slot(m)] =
                run_one(day, horizon_s, plan.starts[e], static_cast<int>(e), m, policy, settings, frozen);
        }
    }
    return rows;
}

}  // namespace serial

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty sample");
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double summarize(const std::vector<double>& v, DailyStatistic statistic) {
    if (statistic == DailyStatistic::median) return median_of(v);
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<DailyGapSeries> gaps_from_scores(std::span<const DailyScore> scores) {
    std::map<int, std::vector<const DailyScore*>> by_horizon;
    for (const auto& s : scores) by_horizon[s.horizon_s].push_back(&s);
    std::vector<DailyGapSeries> out;
    for (auto& [h, list] : by_horizon) {
        std::sort(list.begin(), list.end(), [](const DailyScore* a, const DailyScore* b) { return a->day < b->day; });
        DailyGapSeries twap{h, "TWAP", {}, {}};
        DailyGapSeries vwap{h, "VWAP", {}, {}};
        for (const auto* s : list) {
            twap.days.push_back(s->day);
            twap.gaps.push_back(s->gap_twap());
            vwap.days.push_back(s->day);
            vwap.gaps.push_back(s->gap_vwap());
        }
        out.push_back(std::move(twap));
        out.push_back(std::move(vwap));
    }
    return out;
}

DailyAggregation aggregate_daily(std::span<const EpisodeResult> rows, DailyStatistic statistic) {
    struct Cell {
        std::array<std::vector<double>, 3> pnl;
        std::array<std::vector<std::size_t>, 3> starts;
    };
    std::map<std::pair<int, Date>, Cell> cells;
    for (const auto& r : rows) {
        auto& cell = cells[{r.horizon_s, r.day}];
        cell.pnl[method_slot(r.method)].push_back(r.pnl_percent);
        cell.starts[method_slot(r.method)].push_back(r.start_index);
    }

    DailyAggregation out;
    for (auto& [key, cell] : cells) {
        for (std::size_t m = 0; m < 3; ++m) {
            if (cell.pnl[m].empty()) {
                throw std::invalid_argument("day " + key.second.str() + " horizon " + std::to_string(key.first) +
                                            " has no " + method_name(static_cast<Method>(m)) + " rows");
            }
            std::sort(cell.starts[m].begin(), cell.starts[m].end());
        }
        if (cell.starts[0] != cell.starts[1] || cell.starts[0] != cell.starts[2]) {
            throw std::invalid_argument("day " + key.second.str() + " horizon " + std::to_string(key.first) +
                                        ": methods were not run on identical start sets");
        }
        DailyScore s;
        s.day = key.second;
        s.horizon_s = key.first;
        s.rl = summarize(cell.pnl[0], statistic);
        s.twap = summarize(cell.pnl[1], statistic);
        s.vwap = summarize(cell.pnl[2], statistic);
        out.scores.push_back(s);
    }
    out.gap_series = gaps_from_scores(out.scores);
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

template <class RowFn>
void read_rows(const std::filesystem::path& path, std::string_view header, std::size_t columns, RowFn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || csv::trim_eol(line) != header) {
        throw std::runtime_error(path.string() + ": unexpected header, want '" + std::string(header) + "'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = csv::trim_eol(line);
        if (trimmed.empty()) continue;
        const auto f = csv::split(trimmed);
        if (f.size() != columns) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(columns) + " columns");
        }
        try {
            fn(f);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

void write_episode_csv(std::span<const EpisodeResult> rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    std::string buf = kEpisodeCsvHeader;
    buf += '\n';
    for (const auto& r : rows) {
        buf += r.day.str();
        buf += ',' + std::to_string(r.episode_id) + ',' + std::to_string(r.start_index) + ',' +
               std::to_string(r.horizon_s) + ',' + method_name(r.method) + ',';
        csv::append_double(buf, r.pnl_percent);
        buf += ',';
        csv::append_double(buf, r.cum_reward);
        buf += ',' + std::to_string(r.fills) + ',';
        csv::append_double(buf, r.residual_fraction);
        buf += '\n';
    }
    out << buf;
}

std::vector<EpisodeResult> read_episode_csv(const std::filesystem::path& path) {
    std::vector<EpisodeResult> rows;
    read_rows(path, kEpisodeCsvHeader, 9, [&](const std::vector<std::string_view>& f) {
        EpisodeResult r;
        r.day = Date::parse(f[0]);
        r.episode_id = static_cast<int>(csv::parse_int(f[1]));
        r.start_index = static_cast<std::size_t>(csv::parse_int(f[2]));
        r.horizon_s = static_cast<int>(csv::parse_int(f[3]));
        r.method = parse_method(f[4]);
        r.pnl_percent = csv::parse_double(f[5]);
        r.cum_reward = csv::parse_double(f[6]);
        r.fills = static_cast<std::size_t>(csv::parse_int(f[7]));
        r.residual_fraction = csv::parse_double(f[8]);
        if (!std::isfinite(r.pnl_percent)) throw std::invalid_argument("non-finite pnl_percent");
        rows.push_back(r);
    });
    return rows;
}

void write_daily_csv(std::span<const DailyScore> scores, const std::filesystem::path& path) {
    auto out = open_out(path);
    std::string buf = kDailyCsvHeader;
    buf += '\n';
    for (const auto& s : scores) {
        buf += s.day.str() + ',' + std::to_string(s.horizon_s);
        for (double v : {s.rl, s.twap, s.vwap, s.gap_twap(), s.gap_vwap()}) {
            buf += ',';
            csv::append_double(buf, v);
        }
        buf += '\n';
    }
    out << buf;
}

std::vector<DailyScore> read_daily_csv(const std::filesystem::path& path) {
    std::vector<DailyScore> scores;
    read_rows(path, kDailyCsvHeader, 7, [&](const std::vector<std::string_view>& f) {
        DailyScore s;
        s.day = Date::parse(f[0]);
        s.horizon_s = static_cast<int>(csv::parse_int(f[1]));
        s.rl = csv::parse_double(f[2]);
        s.twap = csv::parse_double(f[3]);
        s.vwap = csv::parse_double(f[4]);
        scores.push_back(s);
    });
    return scores;
}

std::string episode_csv_name(int horizon_s, std::size_t k) {
    return "episodes_H" + std::to_string(horizon_s) + "_k" + std::to_string(k) + ".csv";
}

std::string daily_csv_name(int horizon_s, std::size_t k) {
    return "daily_H" + std::to_string(horizon_s) + "_k" + std::to_string(k) + ".csv";
}

}  // namespace lobsim

#include "lobsim/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "lobsim/csv.hpp"
#include "lobsim/hashing.hpp"

extern char** environ;

namespace lobsim {

using nlohmann::json;

const char* code_version() noexcept { return LOBSIM_VERSION; }

const char* policy_source_name(PolicySource p) noexcept {
    switch (p) {
        case PolicySource::twap: return "twap";
        case PolicySource::vwap: return "vwap";
        case PolicySource::random: return "random";
        case PolicySource::oracle: return "oracle";
        case PolicySource::bridge: return "bridge";
    }
    return "?";
}

PolicySource parse_policy_source(std::string_view name) {
    for (auto p : {PolicySource::twap, PolicySource::vwap, PolicySource::random, PolicySource::oracle,
                   PolicySource::bridge}) {
        if (name == policy_source_name(p)) return p;
    }
    throw ConfigError("policy must be one of twap|vwap|random|oracle|bridge, got '" + std::string(name) + "'");
}

namespace {

template <class F>
void for_each_field(RunConfig& c, F&& f) {
    f("data_dir", c.data_dir);
    f("date_from", c.date_from);
    f("date_to", c.date_to);
    f("horizons", c.horizons);
    f("k_starts", c.k_starts);
    f("seed", c.seed);
    f("placement", c.placement);
    f("taker_fee_bps", c.taker_fee_bps);
    f("maker_rebate_bps", c.maker_rebate_bps);
    f("impact_k", c.impact_k);
    f("impact_exponent", c.impact_exponent);
    f("impact_half_life_s", c.impact_half_life_s);
    f("initial_btc", c.initial_btc);
    f("target_fraction", c.target_fraction);
    f("trade_fraction", c.trade_fraction);
    f("inventory_penalty", c.inventory_penalty);
    f("policy", c.policy);
    f("policy_command", c.policy_command);
    f("oracle_boost", c.oracle_boost);
    f("norm_stats", c.norm_stats);
    f("output_dir", c.output_dir);
    f("aggregate", c.aggregate);
    f("winsorize", c.winsorize);
    f("alpha", c.alpha);
    f("alternative", c.alternative);
    f("bootstrap_resamples", c.bootstrap_resamples);
    f("impact_sweep", c.impact_sweep);
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

void parse_text(std::string_view /*key*/, std::string_view text, std::string& out) { out = text; }

void parse_text(std::string_view key, std::string_view text, double& out) {
    try {
        out = csv::parse_double(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
    if (!std::isfinite(out)) throw ConfigError(std::string(key) + ": expected a finite number");
}

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

void parse_text(std::string_view key, std::string_view text, std::size_t& out) {
    out = static_cast<std::size_t>(parse_unsigned(key, text));
}

void parse_text(std::string_view key, std::string_view text, bool& out) {
    if (text == "1" || text == "true" || text == "yes") {
        out = true;
    } else if (text == "0" || text == "false" || text == "no") {
        out = false;
    } else {
        throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(text) + "'");
    }
}

void parse_text(std::string_view key, std::string_view text, std::vector<int>& out) {
    out.clear();
    for (auto part : csv::split(text)) {
        const auto v = parse_unsigned(key, part);
        out.push_back(static_cast<int>(v));
    }
}

std::string env_name(std::string_view key) {
    std::string out = "LOBSIM_";
    for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_date_or_empty(const std::string& s) {
    if (s.empty()) return true;
    try {
        Date::parse(s);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (horizons.empty()) fail("horizons must not be empty");
    for (int h : horizons) {
        if (h <= 0) fail("horizons must be positive");
    }
    if (std::set<int>(horizons.begin(), horizons.end()).size() != horizons.size()) fail("horizons must be distinct");
    if (k_starts == 0) fail("k_starts must be >= 1");
    if (placement != "even" && placement != "jitter") fail("placement must be even|jitter");
    if (!is_date_or_empty(date_from) || !is_date_or_empty(date_to)) fail("date_from/date_to must be YYYYMMDD");
    if (!date_from.empty() && !date_to.empty() && date_from > date_to) fail("date_from is after date_to");
    if (!(initial_btc > 0.0)) fail("initial_btc must be positive");
    if (!(target_fraction >= 0.0 && target_fraction < 1.0)) fail("target_fraction must lie in [0, 1)");
    if (!(trade_fraction > 0.0 && trade_fraction <= 1.0)) fail("trade_fraction must lie in (0, 1]");
    if (!(inventory_penalty >= 0.0)) fail("inventory_penalty must be >= 0");
    if (!(oracle_boost > 0.0)) fail("oracle_boost must be positive");
    const PolicySource src = parse_policy_source(policy);
    if (src == PolicySource::bridge && policy_command.empty()) fail("policy = bridge needs policy_command");
    if (aggregate != "mean" && aggregate != "median") fail("aggregate must be mean|median");
    if (!(winsorize >= 0.0 && winsorize < 0.5)) fail("winsorize must lie in [0, 0.5)");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (alternative != "greater" && alternative != "two_sided") fail("alternative must be greater|two_sided");
    if (bootstrap_resamples == 0) fail("bootstrap_resamples must be >= 1");
    try {
        engine().fees.validate();
        engine().impact.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

EngineParams RunConfig::engine() const {
    EngineParams e;
    e.fees.taker_fee = taker_fee_bps * 1e-4;
    e.fees.maker_rebate = maker_rebate_bps * 1e-4;
    e.impact.coeff = impact_k;
    e.impact.size_exponent = impact_exponent;
    e.impact.half_life_s = impact_half_life_s;
    return e;
}

EvalSettings RunConfig::eval_settings() const {
    EvalSettings s;
    s.engine = engine();
    s.reward.inventory_penalty = inventory_penalty;
    s.initial_btc = initial_btc;
    s.target_fraction = target_fraction;
    s.trade_fraction = trade_fraction;
    s.k_starts = k_starts;
    s.seed = seed;
    s.placement = placement == "jitter" ? StartPlacement::jitter : StartPlacement::even;
    return s;
}

stats::StatsSettings RunConfig::stats_settings() const {
    stats::StatsSettings s;
    s.alpha = alpha;
    s.winsorize = winsorize;
    s.alternative = alternative == "two_sided" ? stats::Alternative::two_sided : stats::Alternative::greater;
    s.bootstrap.resamples = bootstrap_resamples;
    s.bootstrap.seed = seed;
    return s;
}

DailyStatistic RunConfig::daily_statistic() const {
    return aggregate == "median" ? DailyStatistic::median : DailyStatistic::mean;
}

std::optional<Date> RunConfig::first_date() const {
    if (date_from.empty()) return std::nullopt;
    return Date::parse(date_from);
}

std::optional<Date> RunConfig::last_date() const {
    if (date_to.empty()) return std::nullopt;
    return Date::parse(date_to);
}

json to_json(const RunConfig& cfg) {
    json j = json::object();
    j["schema_version"] = RunConfig::kSchemaVersion;
    RunConfig copy = cfg;
    for_each_field(copy, [&](const char* key, auto& value) { j[key] = value; });
    return j;
}

RunConfig apply_json(const json& j, RunConfig base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("schema_version")) {
        if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != RunConfig::kSchemaVersion) {
            throw ConfigError("unsupported config schema_version " + j["schema_version"].dump());
        }
    }
    std::set<std::string> known = {"schema_version"};
    for_each_field(base, [&](const char* key, auto& value) {
        known.insert(key);
        if (!j.contains(key)) return;
        try {
            value = j.at(key).get<std::decay_t<decltype(value)>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    });
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return apply_json(j, std::move(base));
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write config " + path.string());
    out << to_json(cfg).dump(2) << '\n';
}

RunConfig apply_env(const std::map<std::string, std::string>& env, RunConfig base) {
    std::set<std::string> known;
    for_each_field(base, [&](const char* key, auto& value) {
        known.insert(env_name(key));
        const auto it = env.find(env_name(key));
        if (it != env.end()) parse_text(key, it->second, value);
    });
    for (const auto& [name, _] : env) {
        if (name.starts_with("LOBSIM_") && !known.count(name)) throw ConfigError("unknown environment override " + name);
    }
    return base;
}

std::map<std::string, std::string> process_env() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string_view kv(*e);
        if (!kv.starts_with("LOBSIM_")) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    return out;
}

std::string canonical_config(const RunConfig& cfg) { return to_json(cfg).dump(); }

json Manifest::to_json() const {
    json j = json::object();
    j["code_version"] = code_version;
    j["config"] = lobsim::to_json(config);
    j["config_sha256"] = sha256_hex(canonical_config(config));
    json inputs_j = json::array();
    for (const auto& f : inputs) inputs_j.push_back({{"path", f.path}, {"sha256", f.sha256}});
    j["inputs"] = inputs_j;
    json skipped_j = json::array();
    for (const auto& s : skipped) skipped_j.push_back({{"day", s.day}, {"horizon_s", s.horizon_s}, {"reason", s.reason}});
    j["skipped_days"] = skipped_j;
    j["seeds"] = {{"seed", config.seed}, {"bootstrap_seed", config.seed}, {"placement", config.placement}};
    j["norm_stats_sha256"] = norm_stats_sha256;
    j["outputs"] = outputs;
    return j;
}

}  // namespace lobsim

// lobsim: replay-with-impact liquidation simulator and paired evaluation.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lobsim/commands.hpp"

using namespace lobsim;

namespace {

struct ConfigFlags {
    std::optional<std::string> data_dir, date_from, date_to, placement, policy, policy_command, norm_stats, output_dir,
        aggregate, alternative;
    std::vector<int> horizons;
    std::optional<std::size_t> k_starts, bootstrap_resamples;
    std::optional<std::uint64_t> seed;
    std::optional<double> taker_fee_bps, maker_rebate_bps, impact_k, impact_exponent, impact_half_life_s, initial_btc,
        target_fraction, trade_fraction, inventory_penalty, oracle_boost, winsorize, alpha;
    bool impact_sweep = false;

    void add_to(CLI::App& app) {
        app.add_option("--data-dir", data_dir, "Directory of YYYYMMDD.csv|.lobd day files");
        app.add_option("--date-from", date_from, "First day (YYYYMMDD)");
        app.add_option("--date-to", date_to, "Last day (YYYYMMDD)");
        app.add_option("--horizons", horizons, "Horizons in seconds, comma separated")->delimiter(',');
        app.add_option("--k-starts", k_starts, "Intra-day starts per day");
        app.add_option("--seed", seed, "Master seed");
        app.add_option("--placement", placement, "Start placement: even|jitter");
        app.add_option("--taker-fee-bps", taker_fee_bps, "Taker fee in bps");
        app.add_option("--maker-rebate-bps", maker_rebate_bps, "Maker rebate in bps");
        app.add_option("--impact-k", impact_k, "Impact coefficient");
        app.add_option("--impact-exponent", impact_exponent, "Impact size exponent");
        app.add_option("--impact-half-life", impact_half_life_s, "Impact half-life in seconds");
        app.add_option("--initial-btc", initial_btc, "Inventory to liquidate");
        app.add_option("--target-fraction", target_fraction, "Allowed residual fraction");
        app.add_option("--trade-fraction", trade_fraction, "Per-step cap on the fraction of inventory sold");
        app.add_option("--inventory-penalty", inventory_penalty, "Terminal residual penalty");
        app.add_option("--policy", policy, "twap|vwap|random|oracle|bridge");
        app.add_option("--policy-command", policy_command, "Command serving an external policy");
        app.add_option("--oracle-boost", oracle_boost, "Oracle pace multiplier");
        app.add_option("--norm-stats", norm_stats, "Frozen normalizer stats file");
        app.add_option("--out", output_dir, "Output directory");
        app.add_option("--aggregate", aggregate, "Daily statistic: mean|median");
        app.add_option("--winsorize", winsorize, "Winsorization fraction of daily gaps");
        app.add_option("--alpha", alpha, "Significance level");
        app.add_option("--alternative", alternative, "greater|two_sided");
        app.add_option("--bootstrap-resamples", bootstrap_resamples, "Bootstrap resamples");
        app.add_flag("--impact-sweep", impact_sweep, "Re-run with impact k and half-life scaled by 0.5, 1, 2");
    }

    void apply(RunConfig& c) const {
        auto set = [](auto& dst, const auto& src) {
            if (src) dst = *src;
        };
        set(c.data_dir, data_dir);
        set(c.date_from, date_from);
        set(c.date_to, date_to);
        if (!horizons.empty()) c.horizons = horizons;
        set(c.k_starts, k_starts);
        set(c.seed, seed);
        set(c.placement, placement);
        set(c.taker_fee_bps, taker_fee_bps);
        set(c.maker_rebate_bps, maker_rebate_bps);
        set(c.impact_k, impact_k);
        set(c.impact_exponent, impact_exponent);
        set(c.impact_half_life_s, impact_half_life_s);
        set(c.initial_btc, initial_btc);
        set(c.target_fraction, target_fraction);
        set(c.trade_fraction, trade_fraction);
        set(c.inventory_penalty, inventory_penalty);
        set(c.policy, policy);
        set(c.policy_command, policy_command);
        set(c.oracle_boost, oracle_boost);
        set(c.norm_stats, norm_stats);
        set(c.output_dir, output_dir);
        set(c.aggregate, aggregate);
        set(c.winsorize, winsorize);
        set(c.alpha, alpha);
        set(c.alternative, alternative);
        set(c.bootstrap_resamples, bootstrap_resamples);
        if (impact_sweep) c.impact_sweep = true;
    }
};

DayFormat parse_format(const std::string& s) {
    if (s == "csv") return DayFormat::csv;
    if (s == "binary") return DayFormat::binary;
    throw ConfigError("format must be csv|binary");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lobsim: LOB replay-with-impact liquidation simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(code_version()));

    std::string config_path;
    app.add_option("--config", config_path, "JSON run config");
    ConfigFlags flags;
    flags.add_to(app);

    auto* ingest = app.add_subcommand("ingest", "Validate day files and write canonical copies");
    std::vector<std::string> ingest_inputs;
    std::string ingest_out = "ingested";
    std::string format = "binary";
    ingest->add_option("inputs", ingest_inputs, "Day files or directories")->required();
    ingest->add_option("-o,--output", ingest_out, "Destination directory");
    ingest->add_option("--format", format, "csv|binary");

    auto* eval = app.add_subcommand("eval-compare", "Run policy and baselines on every day and start");

    auto* stats_cmd = app.add_subcommand("stats-eval", "Paired tests on daily gaps");
    std::vector<std::string> stats_inputs;
    stats_cmd->add_option("inputs", stats_inputs, "Per-episode or per-day CSVs")->required();

    auto* plot = app.add_subcommand("plot", "SVG/CSV figures from daily scores");
    std::vector<std::string> plot_inputs;
    std::string plot_out = "plots";
    plot->add_option("inputs", plot_inputs, "Per-day or per-episode CSVs")->required();
    plot->add_option("-o,--output", plot_out, "Destination directory");

    auto* serve = app.add_subcommand("bridge-serve", "Serve the environment over line-delimited JSON");
    std::string transport = "stdio";
    std::uint16_t port = 0;
    std::size_t max_connections = 0;
    serve->add_option("--transport", transport, "stdio|socket")->check(CLI::IsMember({"stdio", "socket"}));
    serve->add_option("--port", port, "TCP port for --transport socket (0 = any free port)");
    serve->add_option("--max-connections", max_connections, "Stop after this many connections (0 = never)");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic month of day files");
    std::string synth_out = "data";
    std::string synth_first = "20200201";
    std::size_t synth_days = 28;
    std::uint64_t synth_seed = 1;
    synthetic::MarketParams market;
    synth->add_option("-o,--output", synth_out, "Destination directory");
    synth->add_option("--first", synth_first, "First date (YYYYMMDD)");
    synth->add_option("--days", synth_days, "Number of days");
    synth->add_option("--snapshots", market.snapshots, "Snapshots per day");
    synth->add_option("--market-seed", synth_seed, "Generator seed");
    synth->add_option("--ar-phi", market.ar_phi, "AR(1) coefficient of the mid deviation");
    synth->add_option("--ar-vol-bps", market.ar_vol_bps, "AR(1) innovation sd (bps)");
    synth->add_option("--trend-vol-bps", market.trend_vol_bps, "Trend sd per snapshot (bps)");
    synth->add_option("--level-size", market.level_size, "Mean BTC per level");
    synth->add_option("--format", format, "csv|binary");

    auto* fit = app.add_subcommand("fit-norm", "Fit observation normalizer stats on a date range");
    std::string stats_out = "norm.lobnorm";
    fit->add_option("--stats-out", stats_out, "Output stats file");

    auto* show = app.add_subcommand("config", "Print the effective config as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(kExitConfig);
    }

    RunConfig cfg;
    const int rc = run_guarded(
        [&] {
            if (!config_path.empty()) cfg = load_config(config_path, cfg);
            cfg = apply_env(process_env(), cfg);
            flags.apply(cfg);
            return 0;
        },
        std::cerr);
    if (rc != 0) return rc;

    auto paths = [](const std::vector<std::string>& v) { return std::vector<std::filesystem::path>(v.begin(), v.end()); };

    if (*ingest) {
        return run_guarded(
            [&] { return cmd_ingest(paths(ingest_inputs), ingest_out, parse_format(format), std::cout, std::cerr); },
            std::cerr);
    }
    if (*eval) return cmd_eval_compare(cfg, std::cout, std::cerr);
    if (*stats_cmd) return cmd_stats_eval(paths(stats_inputs), cfg, std::cout, std::cerr);
    if (*plot) return cmd_plot(paths(plot_inputs), plot_out, std::cout, std::cerr);
    if (*serve) {
        ServeOptions so;
        so.transport = transport == "socket" ? Transport::socket : Transport::stdio;
        so.port = port;
        so.max_connections = max_connections;
        return cmd_bridge_serve(cfg, so, std::cin, std::cout, std::cerr);
    }
    if (*synth) {
        return run_guarded(
            [&] {
                return cmd_synth(synth_out, Date::parse(synth_first), synth_days, market, synth_seed, parse_format(format),
                                 std::cout, std::cerr);
            },
            std::cerr);
    }
    if (*fit) return cmd_fit_norm(cfg, stats_out, std::cout, std::cerr);
    if (*show) {
        return run_guarded(
            [&] {
                cfg.validate();
                std::cout << to_json(cfg).dump(2) << '\n';
                return 0;
            },
            std::cerr);
    }
    return kExitFailure;
}

#include "lobsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "lobsim/csv.hpp"

namespace lobsim {

namespace {

void require_results(std::span<const stats::TestResult> results) {
    if (results.empty()) throw std::invalid_argument("report: no test results");
}

void append_optional(std::string& out, const std::optional<double>& v) {
    if (v) csv::append_double(out, *v);
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pval(double p) {
    if (p < 1e-4) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2e", p);
        return buf;
    }
    return fixed(p, 4);
}

double bps(double percent) { return percent * 100.0; }

}  // namespace

std::string stats_csv(std::span<const stats::TestResult> results) {
    require_results(results);
    std::string out = kStatsCsvHeader;
    out += '\n';
    for (const auto& r : results) {
        out += std::to_string(r.horizon_s) + ',' + r.baseline + ',' + std::to_string(r.n_days);
        for (double v : {r.mean_gap, r.median_gap, r.p_raw, r.p_adj}) {
            out += ',';
            csv::append_double(out, v);
        }
        out += ',';
        append_optional(out, r.t_p);
        out += ',';
        append_optional(out, r.cohens_d);
        for (double v : {r.win_rate, r.ci_low, r.ci_high}) {
            out += ',';
            csv::append_double(out, v);
        }
        out += r.winsorized ? ",1\n" : ",0\n";
    }
    return out;
}

std::string markdown_report(std::span<const stats::TestResult> results, double alpha,
                            const std::string& manifest_json) {
    require_results(results);
    std::map<int, std::vector<const stats::TestResult*>> by_horizon;
    for (const auto& r : results) by_horizon[r.horizon_s].push_back(&r);

    std::string out = "# Paired daily gaps\n\n";
    out += "Gap = policy pnl% minus baseline pnl% per day, shown in bps. One-sided tests of gap > 0; ";
    out += "BH adjustment within each horizon; alpha = " + fixed(alpha, 3) + ".\n";
    for (const auto& [h, rows] : by_horizon) {
        out += "\n## Horizon " + std::to_string(h) + " s\n\n";
        out += "| Baseline | Days | Mean gap (bps) | Median gap (bps) | 95% CI (bps) | W+ | p (Wilcoxon) | p_adj | "
               "t | p (t) | Cohen's d | Win rate | Winsorized |\n";
        out += "|---|---:|---:|---:|---|---:|---:|---:|---:|---:|---:|---:|---|\n";
        for (const auto* r : rows) {
            out += "| " + r->baseline + " | " + std::to_string(r->n_days) + " | " + fixed(bps(r->mean_gap), 2) + " | " +
                   fixed(bps(r->median_gap), 2) + " | [" + fixed(bps(r->ci_low), 2) + ", " + fixed(bps(r->ci_high), 2) +
                   "] | " + fixed(r->wilcoxon_stat, 1) + " | " + pval(r->p_raw) +
                   (r->wilcoxon_degenerate ? " (all zero)" : r->wilcoxon_exact ? " (exact)" : " (normal)") + " | " +
                   pval(r->p_adj) + (r->rejected(alpha) ? " *" : "") + " | " + fixed(r->t_stat, 3) + " | " +
                   (r->t_p ? pval(*r->t_p) : std::string("n/a")) + " | " +
                   (r->cohens_d ? fixed(*r->cohens_d, 3) : std::string("n/a")) + " | " + fixed(r->win_rate, 3) +
                   " | " + (r->winsorized ? "yes" : "no") + " |\n";
        }
    }
    out += "\n## Manifest\n\n```json\n" + manifest_json + "\n```\n";
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace lobsim

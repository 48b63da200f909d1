#include "lobsim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "lobsim/csv.hpp"
#include "lobsim/report.hpp"

namespace lobsim::plot {

std::vector<Point> ecdf(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("ecdf: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    std::vector<Point> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        out.push_back({v[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

double ecdf_at(std::span<const double> values, double x) {
    if (values.empty()) throw std::invalid_argument("ecdf: empty input");
    const auto below = std::count_if(values.begin(), values.end(), [x](double v) { return v <= x; });
    return static_cast<double>(below) / static_cast<double>(values.size());
}

std::vector<double> cumulative(std::span<const double> values) {
    std::vector<double> out(values.size());
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = s += values[i];
    return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (bins == 0) throw std::invalid_argument("histogram: bins must be >= 1");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

namespace {

// Minimal SVG canvas mapping data coordinates to a fixed 640x400 frame.
class Svg {
public:
    Svg(std::string title, double x0, double x1, double y0, double y1) : title_(std::move(title)) {
        if (x1 == x0) x1 = x0 + 1.0;
        if (y1 == y0) y1 = y0 + 1.0;
        x0_ = x0, x1_ = x1, y0_ = y0, y1_ = y1;
    }

    double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kPad); }
    double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kBottom - kPad); }

    void line(double xa, double ya, double xb, double yb, const char* stroke, double width = 1.0) {
        body_ += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"%.1f\"/>\n",
                     px(xa), py(ya), px(xb), py(yb), stroke, width);
    }

    void rect(double xa, double ya, double xb, double yb, const char* fill) {
        const double l = std::min(px(xa), px(xb));
        const double t = std::min(py(ya), py(yb));
        body_ += fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", l, t,
                     std::abs(px(xb) - px(xa)), std::abs(py(yb) - py(ya)), fill);
    }

    void circle(double x, double y, const char* fill) {
        body_ += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(y), fill);
    }

    void polyline(const std::vector<Point>& pts, const char* stroke) {
        body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" points=\"";
        for (const auto& p : pts) body_ += fmt("%.2f,%.2f ", px(p.x), py(p.y));
        body_ += "\"/>\n";
    }

    std::string str(const std::string& xlabel, const std::string& ylabel) const {
        std::string out = fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", kWidth, kHeight);
        out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out += fmt("<text x=\"%d\" y=\"16\" font-size=\"14\" font-family=\"sans-serif\">", kLeft) + title_ + "</text>\n";
        out += fmt("<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", kLeft, kHeight - kBottom,
                   kWidth - kPad, kHeight - kBottom);
        out += fmt("<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", kLeft, kPad, kLeft,
                   kHeight - kBottom);
        out += fmt("<text x=\"%d\" y=\"%d\" font-size=\"11\" font-family=\"sans-serif\">", kLeft, kHeight - 8) + xlabel +
               fmt(" [%.4g, %.4g]</text>\n", x0_, x1_);
        out += fmt("<text x=\"4\" y=\"%d\" font-size=\"11\" font-family=\"sans-serif\">", kPad + 10) + ylabel +
               fmt(" [%.4g, %.4g]</text>\n", y0_, y1_);
        out += body_;
        out += "</svg>\n";
        return out;
    }

private:
    static constexpr int kWidth = 640;
    static constexpr int kHeight = 400;
    static constexpr int kLeft = 60;
    static constexpr int kBottom = 40;
    static constexpr int kPad = 24;

    template <class... Args>
    static std::string fmt(const char* f, Args... args) {
        char buf[256];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    std::string title_;
    std::string body_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

std::pair<double, double> range_with_zero(std::span<const double> v) {
    double lo = 0.0;
    double hi = 0.0;
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return {lo, hi};
}

std::string num(double v) { return csv::format_double(v); }

}  // namespace

std::vector<std::filesystem::path> write_plots(std::span<const DailyScore> scores, const std::filesystem::path& out_dir) {
    if (scores.empty()) throw std::invalid_argument("plot: no daily scores");
    std::map<int, std::vector<DailyScore>> by_horizon;
    for (const auto& s : scores) by_horizon[s.horizon_s].push_back(s);

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = out_dir / name;
        write_text_file(path, text);
        written.push_back(path);
    };

    for (auto& [h, rows] : by_horizon) {
        std::sort(rows.begin(), rows.end(), [](const DailyScore& a, const DailyScore& b) { return a.day < b.day; });
        for (const char* baseline : {"TWAP", "VWAP"}) {
            const bool twap = std::string_view(baseline) == "TWAP";
            std::vector<double> gaps_bps;
            std::vector<double> base;
            std::vector<double> rl;
            for (const auto& r : rows) {
                gaps_bps.push_back(100.0 * (twap ? r.gap_twap() : r.gap_vwap()));
                base.push_back(twap ? r.twap : r.vwap);
                rl.push_back(r.rl);
            }
            const std::string stem = "H" + std::to_string(h) + "_" + baseline;
            const std::string label = "RL - " + std::string(baseline) + ", H = " + std::to_string(h) + " s";
            const double n = static_cast<double>(gaps_bps.size());

            // Daily gap bars.
            {
                std::string csv = "day,gap_bps\n";
                for (std::size_t i = 0; i < rows.size(); ++i) csv += rows[i].day.str() + "," + num(gaps_bps[i]) + "\n";
                emit("gaps_" + stem + ".csv", csv);
                const auto [lo, hi] = range_with_zero(gaps_bps);
                Svg svg("Daily gaps (bps): " + label, 0.0, n, lo, hi);
                for (std::size_t i = 0; i < gaps_bps.size(); ++i) {
                    svg.rect(static_cast<double>(i) + 0.1, 0.0, static_cast<double>(i) + 0.9, gaps_bps[i],
                             gaps_bps[i] > 0.0 ? "#2a7" : "#c44");
                }
                emit("gaps_" + stem + ".svg", svg.str("day index", "gap bps"));
            }
            // Cumulative gaps.
            {
                const auto cum = cumulative(gaps_bps);
                std::string csv = "day,cumulative_gap_bps\n";
                std::vector<Point> pts = {{0.0, 0.0}};
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    csv += rows[i].day.str() + "," + num(cum[i]) + "\n";
                    pts.push_back({static_cast<double>(i + 1), cum[i]});
                }
                emit("cumulative_" + stem + ".csv", csv);
                const auto [lo, hi] = range_with_zero(cum);
                Svg svg("Cumulative gap (bps): " + label, 0.0, n, lo, hi);
                svg.polyline(pts, "#236");
                emit("cumulative_" + stem + ".svg", svg.str("days", "bps"));
            }
            // ECDF.
            {
                const auto pts = ecdf(gaps_bps);
                std::string csv = "gap_bps,ecdf\n";
                for (const auto& p : pts) csv += num(p.x) + "," + num(p.y) + "\n";
                emit("ecdf_" + stem + ".csv", csv);
                const auto [lo, hi] = range_with_zero(gaps_bps);
                Svg svg("ECDF of daily gaps: " + label, lo, hi, 0.0, 1.0);
                std::vector<Point> steps = {{lo, 0.0}};
                double prev = 0.0;
                for (const auto& p : pts) {
                    steps.push_back({p.x, prev});
                    steps.push_back({p.x, p.y});
                    prev = p.y;
                }
                steps.push_back({hi, 1.0});
                svg.polyline(steps, "#236");
                svg.line(0.0, 0.0, 0.0, 1.0, "#999");
                emit("ecdf_" + stem + ".svg", svg.str("gap bps", "F"));
            }
            // Histogram.
            {
                const std::size_t bins = std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(std::sqrt(n))));
                const auto hist = histogram(gaps_bps, bins);
                std::string csv = "bin_low_bps,bin_high_bps,count\n";
                std::size_t top = 0;
                for (std::size_t i = 0; i < bins; ++i) {
                    csv += num(hist.edges[i]) + "," + num(hist.edges[i + 1]) + "," + std::to_string(hist.counts[i]) + "\n";
                    top = std::max(top, hist.counts[i]);
                }
                emit("hist_" + stem + ".csv", csv);
                Svg svg("Histogram of daily gaps: " + label, hist.edges.front(), hist.edges.back(), 0.0,
                        static_cast<double>(top));
                for (std::size_t i = 0; i < bins; ++i) {
                    svg.rect(hist.edges[i], 0.0, hist.edges[i + 1], static_cast<double>(hist.counts[i]), "#68a");
                }
                emit("hist_" + stem + ".svg", svg.str("gap bps", "days"));
            }
            // Scatter of baseline vs policy pnl%.
            {
                std::string csv = "day," + std::string(baseline) + "_pnl_percent,rl_pnl_percent\n";
                double lo = base[0];
                double hi = base[0];
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    csv += rows[i].day.str() + "," + num(base[i]) + "," + num(rl[i]) + "\n";
                    lo = std::min({lo, base[i], rl[i]});
                    hi = std::max({hi, base[i], rl[i]});
                }
                emit("scatter_" + stem + ".csv", csv);
                Svg svg("Daily pnl%: " + std::string(baseline) + " (x) vs RL (y), H = " + std::to_string(h) + " s", lo,
                        hi, lo, hi);
                svg.line(lo, lo, hi, hi, "#999");
                for (std::size_t i = 0; i < rows.size(); ++i) svg.circle(base[i], rl[i], rl[i] > base[i] ? "#2a7" : "#c44");
                emit("scatter_" + stem + ".svg", svg.str(std::string(baseline) + " pnl%", "RL pnl%"));
            }
        }
    }
    return written;
}

}  // namespace lobsim::plot

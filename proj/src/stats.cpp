#include "lobsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "lobsim/rng.hpp"

namespace lobsim::stats {

namespace {

void require_finite(std::span<const double> d, const char* what) {
    for (double x : d) {
        if (!std::isfinite(x)) throw StatsError(std::string(what) + ": non-finite value in sample");
    }
}

// Mean accumulated relative to the first element; exact for constant samples.
double shifted_mean(std::span<const double> d) {
    const double ref = d[0];
    double s = 0.0;
    for (double x : d) s += x - ref;
    return ref + s / static_cast<double>(d.size());
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

struct SignedRanks {
    std::vector<int> doubled;  // 2 * average rank, always an integer
    std::vector<bool> positive;
    std::vector<std::size_t> tie_sizes;
};

SignedRanks signed_ranks(std::span<const double> d) {
    std::vector<double> nz;
    nz.reserve(d.size());
    for (double x : d) {
        if (x != 0.0) nz.push_back(x);
    }
    const std::size_t n = nz.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(nz[a]) < std::abs(nz[b]); });

    SignedRanks r;
    r.doubled.resize(n);
    r.positive.resize(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
        const int twice_avg = static_cast<int>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) {
            r.doubled[k] = twice_avg;
            r.positive[k] = nz[order[k]] > 0.0;
        }
        r.tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return r;
}

// Exact null: every sign pattern is equally likely. counts[s] is the number
// of patterns whose doubled positive rank sum equals s.
std::pair<double, double> exact_tails(const SignedRanks& r, long w2) {
    long total = 0;
    for (int v : r.doubled) total += v;
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (int v : r.doubled) {
        for (long s = reach; s >= 0; --s) {
            if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + v)] += counts[static_cast<std::size_t>(s)];
        }
        reach += v;
    }
    double upper = 0.0;
    double lower = 0.0;
    for (long s = 0; s <= total; ++s) {
        if (s >= w2) upper += counts[static_cast<std::size_t>(s)];
        if (s <= w2) lower += counts[static_cast<std::size_t>(s)];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(r.doubled.size()));
    return {upper / patterns, lower / patterns};
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> d, Alternative alt, WilcoxonMethod method) {
    require_finite(d, "wilcoxon");
    const SignedRanks r = signed_ranks(d);
    WilcoxonResult out;
    out.n_used = r.doubled.size();
    if (out.n_used == 0) {
        out.degenerate = true;
        out.p = 1.0;
        return out;
    }

    long w2 = 0;
    for (std::size_t i = 0; i < out.n_used; ++i) {
        if (r.positive[i]) w2 += r.doubled[i];
    }
    out.statistic = 0.5 * static_cast<double>(w2);

    out.exact = method == WilcoxonMethod::exact ||
                (method == WilcoxonMethod::automatic && out.n_used <= kWilcoxonExactMaxN);
    if (out.exact) {
        if (out.n_used > 60) throw StatsError("wilcoxon: exact distribution limited to n <= 60");
        const auto [upper, lower] = exact_tails(r, w2);
        out.p = alt == Alternative::greater ? upper : std::min(1.0, 2.0 * std::min(upper, lower));
        return out;
    }

    const double n = static_cast<double>(out.n_used);
    double tie_term = 0.0;
    for (std::size_t t : r.tie_sizes) {
        const double tt = static_cast<double>(t);
        tie_term += tt * tt * tt - tt;
    }
    const double mu = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double sd = std::sqrt(var);
    if (alt == Alternative::greater) {
        out.p = normal_upper((out.statistic - mu - 0.5) / sd);
    } else {
        const double z = std::max(0.0, std::abs(out.statistic - mu) - 0.5) / sd;
        out.p = std::min(1.0, 2.0 * normal_upper(z));
    }
    return out;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw StatsError("incomplete beta: a and b must be positive");
    if (std::isnan(x)) return x;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    auto continued_fraction = [](double a, double b, double x) {
        constexpr int kMaxIter = 500;
        constexpr double kEps = 1e-16;
        constexpr double kTiny = 1e-300;
        const double qab = a + b;
        const double qap = a + 1.0;
        const double qam = a - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x / qap;
        if (std::abs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < kEps) return h;
        }
        throw StatsError("incomplete beta: continued fraction did not converge");
    };

    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * continued_fraction(a, b, x) / a;
    return 1.0 - front * continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
    if (!(df > 0.0)) throw StatsError("student t: df must be positive");
    if (std::isnan(t)) return t;
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half : 1.0 - half;
}

TTestResult paired_t(std::span<const double> d, Alternative alt) {
    require_finite(d, "paired t");
    if (d.size() < 2) throw StatsError("paired t: need at least 2 observations");
    TTestResult out;
    const double n = static_cast<double>(d.size());
    out.mean = shifted_mean(d);
    double ss = 0.0;
    for (double x : d) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
    if (!(out.sd > 0.0)) {
        out.degenerate = true;
        out.t = 0.0;
        return out;
    }
    out.t = out.mean / (out.sd / std::sqrt(n));
    const double upper = student_t_upper_tail(out.t, n - 1.0);
    out.p = alt == Alternative::greater ? upper : std::min(1.0, 2.0 * student_t_upper_tail(std::abs(out.t), n - 1.0));
    return out;
}

std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw StatsError("bh_adjust: p-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> adj(m);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        // Ratio first: it is exactly 1 at rank m and >= 1 below, so adj >= p
        // survives rounding.
        const double candidate = static_cast<double>(m) / static_cast<double>(i + 1) * p[order[i]];
        running = std::min(running, candidate);
        adj[order[i]] = running;
    }
    return adj;
}

double nearest_rank(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw StatsError("nearest_rank: empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw StatsError("nearest_rank: q must lie in (0, 1]");
    const double n = static_cast<double>(sorted.size());
    // The slack absorbs representation error in q * n (0.025 * 10000 etc).
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

namespace {

void check_bootstrap(std::span<const double> d, const BootstrapSettings& s) {
    if (d.empty()) throw StatsError("bootstrap: empty sample");
    require_finite(d, "bootstrap");
    if (s.resamples == 0) throw StatsError("bootstrap: need at least one resample");
    if (!(s.level > 0.0 && s.level < 1.0)) throw StatsError("bootstrap: level must lie in (0, 1)");
}

void fill_chunk(std::span<const double> d, const BootstrapSettings& s, std::size_t chunk, std::vector<double>& means) {
    std::mt19937_64 eng(rng::derive(s.seed, chunk));
    const std::size_t n = d.size();
    const double ref = d[0];
    const std::size_t end = std::min(s.resamples, (chunk + 1) * kBootstrapChunk);
    for (std::size_t b = chunk * kBootstrapChunk; b < end; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += d[rng::uniform_index(eng, n)] - ref;
        means[b] = ref + acc / static_cast<double>(n);
    }
}

ConfidenceInterval percentile_interval(std::vector<double>& means, double level) {
    std::sort(means.begin(), means.end());
    const double tail = 0.5 * (1.0 - level);
    return {nearest_rank(means, tail), nearest_rank(means, 1.0 - tail)};
}

}  // namespace

ConfidenceInterval bootstrap_ci_mean(std::span<const double> d, const BootstrapSettings& settings) {
    check_bootstrap(d, settings);
    std::vector<double> means(settings.resamples);
    const auto chunks = static_cast<std::ptrdiff_t>((settings.resamples + kBootstrapChunk - 1) / kBootstrapChunk);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) fill_chunk(d, settings, static_cast<std::size_t>(c), means);
    return percentile_interval(means, settings.level);
}

namespace serial {

ConfidenceInterval bootstrap_ci_mean(std::span<const double> d, const BootstrapSettings& settings) {
    check_bootstrap(d, settings);
    std::vector<double> means(settings.resamples);
    const std::size_t chunks = (settings.resamples + kBootstrapChunk - 1) / kBootstrapChunk;
    for (std::size_t c = 0; c < chunks; ++c) fill_chunk(d, settings, c, means);
    return percentile_interval(means, settings.level);
}

}  // namespace serial

std::optional<double> cohens_d(std::span<const double> d) {
    const TTestResult t = paired_t(d);
    if (t.degenerate) return std::nullopt;
    return t.mean / t.sd;
}

std::vector<double> winsorize(std::span<const double> d, double fraction) {
    if (!(fraction >= 0.0 && fraction < 0.5)) throw StatsError("winsorize: fraction must lie in [0, 0.5)");
    std::vector<double> out(d.begin(), d.end());
    const std::size_t n = out.size();
    if (n == 0 || fraction == 0.0) return out;
    require_finite(d, "winsorize");
    std::vector<double> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    k = std::min(k, (n - 1) / 2);
    const double lo = sorted[k];
    const double hi = sorted[n - 1 - k];
    for (double& x : out) x = std::clamp(x, lo, hi);
    return out;
}

double win_rate(std::span<const double> d) {
    if (d.empty()) throw StatsError("win_rate: empty sample");
    const auto wins = std::count_if(d.begin(), d.end(), [](double x) { return x > 0.0; });
    return static_cast<double>(wins) / static_cast<double>(d.size());
}

double mean(std::span<const double> d) {
    if (d.empty()) throw StatsError("mean: empty sample");
    return shifted_mean(d);
}

double median(std::span<const double> d) {
    if (d.empty()) throw StatsError("median: empty sample");
    return median_of(std::vector<double>(d.begin(), d.end()));
}

std::uint64_t series_seed(std::uint64_t seed, int horizon_s, const std::string& baseline) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : baseline) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return rng::derive(rng::derive(seed, static_cast<std::uint64_t>(horizon_s)), h);
}

std::vector<TestResult> evaluate(std::span<const DailyGapSeries> series, const StatsSettings& settings) {
    if (series.empty()) throw StatsError("evaluate: no gap series");
    if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) throw StatsError("alpha must lie in (0, 1)");

    std::vector<TestResult> results;
    results.reserve(series.size());
    for (const auto& s : series) {
        if (s.gaps.size() != s.days.size()) throw StatsError("gap series: days and gaps differ in length");
        if (s.gaps.size() < 2) {
            throw StatsError("horizon " + std::to_string(s.horizon_s) + " vs " + s.baseline + ": need at least 2 days, have " +
                             std::to_string(s.gaps.size()));
        }
        const std::vector<double> x = settings.winsorize > 0.0 ? winsorize(s.gaps, settings.winsorize) : s.gaps;

        TestResult r;
        r.baseline = s.baseline;
        r.horizon_s = s.horizon_s;
        r.n_days = x.size();
        r.winsorized = settings.winsorize > 0.0;
        r.mean_gap = mean(x);
        r.median_gap = median(x);
        const WilcoxonResult w = wilcoxon_signed_rank(x, settings.alternative, settings.wilcoxon);
        r.wilcoxon_stat = w.statistic;
        r.wilcoxon_n = w.n_used;
        r.wilcoxon_exact = w.exact;
        r.wilcoxon_degenerate = w.degenerate;
        r.p_raw = w.p;
        const TTestResult t = paired_t(x, settings.alternative);
        r.t_stat = t.t;
        r.t_p = t.p;
        if (!t.degenerate) r.cohens_d = t.mean / t.sd;
        r.win_rate = win_rate(x);
        BootstrapSettings b = settings.bootstrap;
        b.seed = series_seed(settings.bootstrap.seed, s.horizon_s, s.baseline);
        const ConfidenceInterval ci = bootstrap_ci_mean(x, b);
        r.ci_low = ci.low;
        r.ci_high = ci.high;
        results.push_back(std::move(r));
    }

    std::stable_sort(results.begin(), results.end(),
                     [](const TestResult& a, const TestResult& b) { return a.horizon_s < b.horizon_s; });
    for (std::size_t i = 0; i < results.size();) {
        std::size_t j = i;
        while (j < results.size() && results[j].horizon_s == results[i].horizon_s) ++j;
        std::vector<double> p;
        for (std::size_t k = i; k < j; ++k) p.push_back(results[k].p_raw);
        const auto adj = bh_adjust(p);
        for (std::size_t k = i; k < j; ++k) results[k].p_adj = adj[k - i];
        i = j;
    }
    return results;
}

}  // namespace lobsim::stats

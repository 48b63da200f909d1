#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobsim/eval_protocol.hpp"

namespace lobsim::stats {

/// Raised when a sample cannot support the requested statistic.
class StatsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Alternative { greater, two_sided };

enum class WilcoxonMethod { automatic, exact, normal };

/// Sample sizes up to this use the exact null distribution.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

struct WilcoxonResult {
    double statistic = 0.0;  ///< W+ on average ranks of |d|
    double p = 1.0;
    std::size_t n_used = 0;  ///< after dropping exact zeros
    bool exact = false;
    bool degenerate = false;  ///< every difference was zero
};

/// Signed-rank test of median > 0 (or != 0). Zeros are dropped and tied
/// |d| get average ranks. The exact branch counts sign assignments with a
/// DP over doubled rank sums, so ties stay exact. The normal branch uses the
/// tie-corrected variance and a 0.5 continuity correction.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> d, Alternative alt = Alternative::greater,
                                    WilcoxonMethod method = WilcoxonMethod::automatic);

struct TTestResult {
    double t = 0.0;
    std::optional<double> p;  ///< empty when the sample sd is zero
    double mean = 0.0;
    double sd = 0.0;
    bool degenerate = false;
};

/// One-sample t on paired differences. Zeros are kept. Needs n >= 2.
TTestResult paired_t(std::span<const double> d, Alternative alt = Alternative::greater);

/// P(T > t) for Student t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

/// I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> p);

struct BootstrapSettings {
    std::size_t resamples = 10000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;

    bool operator==(const ConfidenceInterval&) const = default;
};

/// Resamples per RNG substream. Chunk c draws from mt19937_64(derive(seed, c)).
inline constexpr std::size_t kBootstrapChunk = 256;

/// Percentile interval for the mean with nearest-rank quantiles:
/// low = m_(ceil(B*a/2)), high = m_(ceil(B*(1-a/2))) on the sorted
/// resampled means m_(1) <= ... <= m_(B).
ConfidenceInterval bootstrap_ci_mean(std::span<const double> d, const BootstrapSettings& settings = {});

namespace serial {
ConfidenceInterval bootstrap_ci_mean(std::span<const double> d, const BootstrapSettings& settings = {});
}

/// Nearest-rank quantile: sorted[ceil(q * n) - 1], q in (0, 1].
double nearest_rank(std::span<const double> sorted, double q);

/// mean / sd with the n-1 denominator. Empty when sd is zero. Needs n >= 2.
std::optional<double> cohens_d(std::span<const double> d);

/// Clamps the k = ceil(fraction * n) smallest values up to the (k+1)-th
/// smallest and the k largest down to the (k+1)-th largest.
std::vector<double> winsorize(std::span<const double> d, double fraction);

/// Share of strictly positive values. Zeros count as non-wins.
double win_rate(std::span<const double> d);

double mean(std::span<const double> d);
double median(std::span<const double> d);

struct StatsSettings {
    double alpha = 0.05;
    double winsorize = 0.0;
    Alternative alternative = Alternative::greater;
    WilcoxonMethod wilcoxon = WilcoxonMethod::automatic;
    BootstrapSettings bootstrap;
};

struct TestResult {
    std::string baseline;
    int horizon_s = 0;
    std::size_t n_days = 0;
    double mean_gap = 0.0;  ///< percent
    double median_gap = 0.0;
    double wilcoxon_stat = 0.0;
    std::size_t wilcoxon_n = 0;
    bool wilcoxon_exact = false;
    bool wilcoxon_degenerate = false;
    double p_raw = 1.0;
    double p_adj = 1.0;
    double t_stat = 0.0;
    std::optional<double> t_p;
    std::optional<double> cohens_d;
    double win_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool winsorized = false;

    bool rejected(double alpha) const noexcept { return p_adj < alpha; }
};

/// Bootstrap seed for one (horizon, baseline) series.
std::uint64_t series_seed(std::uint64_t seed, int horizon_s, const std::string& baseline) noexcept;

/// Tests every series; BH runs separately within each horizon. Results are
/// ordered by (horizon, input order). Series need at least two days.
std::vector<TestResult> evaluate(std::span<const DailyGapSeries> series, const StatsSettings& settings);

}  // namespace lobsim::stats

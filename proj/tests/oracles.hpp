#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lobsim/book.hpp"

namespace lobsim::oracle {

struct Walk {
    double filled = 0.0;
    double proceeds = 0.0;
};

/// Fill of a market sell as the sum over levels of the overlap between
/// [0, qty) and each level's cumulative size interval.
inline Walk level_walk(const Snapshot& s, double qty, double displacement = 0.0) {
    Walk w;
    double before = 0.0;
    for (const auto& lvl : s.bids) {
        if (lvl.size <= 0.0) continue;
        const double lo = before;
        const double hi = before + lvl.size;
        const double overlap = std::max(0.0, std::min(qty, hi) - lo);
        w.filled += overlap;
        w.proceeds += overlap * std::max(0.0, lvl.price + displacement);
        before = hi;
    }
    return w;
}

/// Average rank of |d_i| among the nonzero |d| (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& a) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        double less = 0.0;
        double equal = 0.0;
        for (double x : a) {
            if (x < a[i]) less += 1.0;
            if (x == a[i]) equal += 1.0;
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

/// One-sided (greater) signed-rank p by enumerating all 2^n sign flips.
inline double wilcoxon_enumerate(const std::vector<double>& d, bool two_sided = false) {
    std::vector<double> a;
    std::vector<bool> pos;
    for (double x : d) {
        if (x != 0.0) {
            a.push_back(std::abs(x));
            pos.push_back(x > 0.0);
        }
    }
    const std::size_t n = a.size();
    const auto ranks = average_ranks(a);
    double w_obs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pos[i]) w_obs += ranks[i];
    }
    std::uint64_t ge = 0;
    std::uint64_t le = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::uint64_t{1} << i)) w += ranks[i];
        }
        if (w >= w_obs - 1e-9) ++ge;
        if (w <= w_obs + 1e-9) ++le;
    }
    const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
    const double p_le = static_cast<double>(le) / static_cast<double>(total);
    return two_sided ? std::min(1.0, 2.0 * std::min(p_ge, p_le)) : p_ge;
}

/// Benjamini-Hochberg from the definition: adj(p_(i)) = min_{j>=i} (m / j) p_(j).
inline std::vector<double> bh_definition(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> s = p;
    std::sort(s.begin(), s.end());
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t pos = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (s[j] == p[i]) pos = j;
        }
        double best = 1.0;
        for (std::size_t j = pos; j < m; ++j) {
            best = std::min(best, static_cast<double>(m) / static_cast<double>(j + 1) * s[j]);
        }
        out[i] = best;
    }
    return out;
}

inline double pearson_two_pass(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // population
};

inline MeanVar batch_mean_var(const std::vector<double>& x) {
    MeanVar mv;
    for (double v : x) mv.mean += v;
    mv.mean /= static_cast<double>(x.size());
    for (double v : x) mv.var += (v - mv.mean) * (v - mv.mean);
    mv.var /= static_cast<double>(x.size());
    return mv;
}

}  // namespace lobsim::oracle

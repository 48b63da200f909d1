#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lobsim/eval_protocol.hpp"

namespace lobsim::plot {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Sorted values with F(x_i) = #(v <= x_i) / n; ties collapse to one point.
std::vector<Point> ecdf(std::span<const double> values);
double ecdf_at(std::span<const double> values, double x);

/// Running sum in input order.
std::vector<double> cumulative(std::span<const double> values);

struct Histogram {
    std::vector<double> edges;  ///< bins + 1 edges
    std::vector<std::size_t> counts;
};
Histogram histogram(std::span<const double> values, std::size_t bins);

/// Writes SVG and CSV series per (horizon, baseline): daily gap bars,
/// cumulative gaps, ECDF, histogram, and baseline-vs-policy scatter. Gaps
/// are drawn in bps. Returns the written paths. Throws on empty input.
std::vector<std::filesystem::path> write_plots(std::span<const DailyScore> scores,
                                               const std::filesystem::path& out_dir);

}  // namespace lobsim::plot

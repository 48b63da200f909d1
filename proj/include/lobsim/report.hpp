#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "lobsim/stats.hpp"

namespace lobsim {

/// Column order of the stats CSV. Gaps and CI bounds are in percent;
/// p_ttest and cohens_d are empty when the sample sd is zero.
inline constexpr const char* kStatsCsvHeader =
    "horizon_s,baseline,n_days,mean_gap,median_gap,p_wilcoxon,p_adj,p_ttest,cohens_d,win_rate,ci_low,ci_high,"
    "winsorized";

std::string stats_csv(std::span<const stats::TestResult> results);

/// One table per horizon (gaps in bps) followed by the run manifest.
/// Throws std::invalid_argument on an empty result list.
std::string markdown_report(std::span<const stats::TestResult> results, double alpha,
                            const std::string& manifest_json);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lobsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lobsim {

enum class NormalizerMode { fitting, frozen };

/// Per-entry running mean/variance used to standardize observations.
///
/// The update is the count-weighted moment merge used by common RL
/// observation normalizers, applied one observation at a time:
///   delta = x - mean, n' = n + 1
///   mean' = mean + delta / n'
///   var'  = (var * n + delta^2 * n / n') / n'
/// Variance is the population variance. Frozen stats never change.
class NormalizerStats {
public:
    static constexpr double kDefaultClip = 10.0;
    static constexpr double kEpsilon = 1e-8;

    NormalizerStats() = default;
    explicit NormalizerStats(std::size_t dim, double clip = kDefaultClip,
                             NormalizerMode mode = NormalizerMode::fitting);

    std::size_t dim() const noexcept { return mean_.size(); }
    std::uint64_t count() const noexcept { return count_; }
    double clip() const noexcept { return clip_; }
    NormalizerMode mode() const noexcept { return mode_; }
    void set_mode(NormalizerMode mode) noexcept { mode_ = mode; }

    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& var() const noexcept { return var_; }

    /// No-op in frozen mode.
    void update(std::span<const double> x);

    /// (x - mean) / sqrt(var + eps), clipped to +/- clip. Never mutates.
    void transform(std::span<const double> x, std::span<double> out) const;

    bool operator==(const NormalizerStats&) const = default;

private:
    friend NormalizerStats load_stats(const std::filesystem::path& path);

    std::vector<double> mean_;
    std::vector<double> var_;
    std::uint64_t count_ = 0;
    double clip_ = kDefaultClip;
    NormalizerMode mode_ = NormalizerMode::fitting;
};

/// Updates first when fitting, then transforms.
std::vector<double> normalize(std::span<const double> obs, NormalizerStats& stats);
std::vector<double> normalize(std::span<const double> obs, const NormalizerStats& frozen);

/// File layout, little-endian:
///   8 bytes  magic "LOBNORM\0"
///   u32      format version (1)
///   u32      dim
///   u64      observation count
///   f64      clip
///   f64[dim] mean
///   f64[dim] var
inline constexpr std::uint32_t kNormalizerFormatVersion = 1;

void save_stats(const NormalizerStats& stats, const std::filesystem::path& path);

/// Loaded stats are frozen.
NormalizerStats load_stats(const std::filesystem::path& path);

}  // namespace lobsim

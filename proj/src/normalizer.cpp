#include "lobsim/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "byte_io.hpp"

namespace lobsim {

namespace {
constexpr char kMagic[8] = {'L', 'O', 'B', 'N', 'O', 'R', 'M', '\0'};
}

NormalizerStats::NormalizerStats(std::size_t dim, double clip, NormalizerMode mode)
    : mean_(dim, 0.0), var_(dim, 1.0), clip_(clip), mode_(mode) {
    if (!(clip > 0.0)) throw std::invalid_argument("normalizer clip must be > 0");
}

void NormalizerStats::update(std::span<const double> x) {
    if (mode_ == NormalizerMode::frozen) return;
    if (x.size() != dim()) throw std::invalid_argument("normalizer: dimension mismatch");
    const double n = static_cast<double>(count_);
    const double total = n + 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double delta = x[i] - mean_[i];
        mean_[i] += delta / total;
        const double m2 = var_[i] * n + delta * delta * n / total;
        var_[i] = m2 / total;
    }
    ++count_;
}

void NormalizerStats::transform(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim() || out.size() != dim()) throw std::invalid_argument("normalizer: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x[i] - mean_[i]) / std::sqrt(var_[i] + kEpsilon);
        out[i] = std::clamp(z, -clip_, clip_);
    }
}

std::vector<double> normalize(std::span<const double> obs, NormalizerStats& stats) {
    stats.update(obs);
    std::vector<double> out(obs.size());
    stats.transform(obs, out);
    return out;
}

std::vector<double> normalize(std::span<const double> obs, const NormalizerStats& frozen) {
    std::vector<double> out(obs.size());
    frozen.transform(obs, out);
    return out;
}

void save_stats(const NormalizerStats& stats, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    detail::put_u32(out, kNormalizerFormatVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(stats.dim()));
    detail::put_u64(out, stats.count());
    detail::put_f64(out, stats.clip());
    for (double m : stats.mean()) detail::put_f64(out, m);
    for (double v : stats.var()) detail::put_f64(out, v);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

NormalizerStats load_stats(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open normalizer stats " + path.string());
    auto corrupt = [&](const char* why) {
        return std::runtime_error("corrupt normalizer stats " + path.string() + ": " + why);
    };

    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw corrupt("bad magic");
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    NormalizerStats stats;
    if (!detail::get_u32(in, version) || version != kNormalizerFormatVersion) throw corrupt("unsupported version");
    if (!detail::get_u32(in, dim) || dim == 0 || dim > (1u << 20)) throw corrupt("bad dimension");
    if (!detail::get_u64(in, stats.count_)) throw corrupt("truncated header");
    if (!detail::get_f64(in, stats.clip_) || !(stats.clip_ > 0.0)) throw corrupt("bad clip");
    stats.mean_.resize(dim);
    stats.var_.resize(dim);
    for (auto& m : stats.mean_) {
        if (!detail::get_f64(in, m) || !std::isfinite(m)) throw corrupt("bad mean");
    }
    for (auto& v : stats.var_) {
        if (!detail::get_f64(in, v) || !std::isfinite(v) || v < 0.0) throw corrupt("bad variance");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw corrupt("trailing bytes");
    stats.mode_ = NormalizerMode::frozen;
    return stats;
}

}  // namespace lobsim

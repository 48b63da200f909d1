#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lobsim/book.hpp"
#include "lobsim/rng.hpp"
#include "lobsim/snapshot_store.hpp"

namespace lobsim::test {

using Levels = std::vector<std::pair<double, double>>;  // (price, size), best first

inline Snapshot make_snapshot(std::int64_t ts, const Levels& bids, const Levels& asks) {
    std::vector<BookLevel> b;
    std::vector<BookLevel> a;
    for (auto [p, s] : bids) b.push_back({p, s});
    for (auto [p, s] : asks) a.push_back({p, s});
    Snapshot snap;
    snap.timestamp_ns = ts;
    snap.bids = forward_fill_levels(b);
    snap.asks = forward_fill_levels(a);
    return snap;
}

/// Valid random depth-20 book. Some deeper levels are empty (size 0).
inline Snapshot random_snapshot(std::mt19937_64& eng, std::int64_t ts = 0) {
    const double mid = rng::uniform(eng, 100.0, 50000.0);
    const double half = mid * rng::uniform(eng, 1e-5, 1e-3);
    Snapshot s;
    s.timestamp_ns = ts;
    double bp = mid - half;
    double ap = mid + half;
    for (std::size_t l = 0; l < kDepth; ++l) {
        const bool empty_b = l > 0 && rng::uniform01(eng) < 0.1;
        const bool empty_a = l > 0 && rng::uniform01(eng) < 0.1;
        s.bids[l] = {bp, empty_b ? 0.0 : rng::uniform(eng, 0.01, 5.0)};
        s.asks[l] = {ap, empty_a ? 0.0 : rng::uniform(eng, 0.01, 5.0)};
        bp -= mid * rng::uniform(eng, 1e-5, 5e-4);
        ap += mid * rng::uniform(eng, 1e-5, 5e-4);
    }
    return s;
}

/// Day of `n` copies of `proto` one second apart.
inline std::shared_ptr<const DayBook> static_day(const Snapshot& proto, std::size_t n, Date date = Date(20200201),
                                                 std::int64_t t0 = 1'580'515'200'000'000'000) {
    auto day = std::make_shared<DayBook>();
    day->date = date;
    day->snapshots.assign(n, proto);
    for (std::size_t i = 0; i < n; ++i) day->snapshots[i].timestamp_ns = t0 + static_cast<std::int64_t>(i) * kNanosPerSecond;
    return day;
}

/// Deep ladder around `mid` at fixed spacing with `size` per level.
inline Snapshot ladder(double mid, double half_spread, double spacing, double size) {
    Snapshot s;
    for (std::size_t l = 0; l < kDepth; ++l) {
        s.bids[l] = {mid - half_spread - static_cast<double>(l) * spacing, size};
        s.asks[l] = {mid + half_spread + static_cast<double>(l) * spacing, size};
    }
    return s;
}

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "lobsim_test_XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::vector<double> normal_sample(std::mt19937_64& eng, std::size_t n, double mu = 0.0, double sd = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = mu + sd * rng::standard_normal(eng);
    return v;
}

}  // namespace lobsim::test

#include "lobsim/snapshot_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

#include "byte_io.hpp"
#include "lobsim/csv.hpp"

namespace lobsim {

namespace fs = std::filesystem;

Date Date::parse(std::string_view text) {
    if (text.size() != 8 || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw std::invalid_argument("expected YYYYMMDD, got '" + std::string(text) + "'");
    }
    const int v = static_cast<int>(csv::parse_int(text));
    const std::chrono::year_month_day ymd{std::chrono::year(v / 10000), std::chrono::month(static_cast<unsigned>((v / 100) % 100)),
                                          std::chrono::day(static_cast<unsigned>(v % 100))};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return Date(v);
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08d", value_);
    return buf;
}

namespace {

constexpr std::size_t kBidPx = 0;
constexpr std::size_t kBidSz = kDepth;
constexpr std::size_t kAskPx = 2 * kDepth;
constexpr std::size_t kAskSz = 3 * kDepth;

bool usable_price(double p) { return std::isfinite(p) && p > 0.0; }

/// Running median over accepted mids (two-heap).
class RunningMedian {
public:
    void push(double x) {
        if (low_.empty() || x <= low_.top()) {
            low_.push(x);
        } else {
            high_.push(x);
        }
        if (low_.size() > high_.size() + 1) {
            high_.push(low_.top());
            low_.pop();
        } else if (high_.size() > low_.size()) {
            low_.push(high_.top());
            high_.pop();
        }
    }
    bool empty() const { return low_.empty(); }
    double value() const {
        if (low_.size() == high_.size()) return 0.5 * (low_.top() + high_.top());
        return low_.top();
    }

private:
    std::priority_queue<double> low_;
    std::priority_queue<double, std::vector<double>, std::greater<>> high_;
};

Ladder side_from_raw(const RawRow& row, std::size_t px_off, std::size_t sz_off) {
    std::vector<BookLevel> present;
    present.reserve(kDepth);
    for (std::size_t i = 0; i < kDepth; ++i) {
        const double p = row.values[px_off + i];
        if (usable_price(p)) present.push_back({p, row.values[sz_off + i]});
    }
    return forward_fill_levels(present);
}

bool ladder_ordered(const Ladder& ladder, bool descending) {
    double prev = ladder[0].price;
    for (std::size_t i = 1; i < kDepth; ++i) {
        if (ladder[i].size <= 0.0) continue;
        const double p = ladder[i].price;
        if (descending ? !(p < prev) : !(p > prev)) return false;
        prev = p;
    }
    return true;
}

bool within_band(const Ladder& ladder, double lo, double hi) {
    for (const auto& lvl : ladder) {
        if (lvl.size > 0.0 && (lvl.price < lo || lvl.price > hi)) return false;
    }
    return true;
}

}  // namespace

std::string csv_header() {
    std::string h = "timestamp_ns";
    const char* groups[] = {"bid_px_", "bid_sz_", "ask_px_", "ask_sz_"};
    for (const char* g : groups) {
        for (std::size_t i = 0; i < kDepth; ++i) {
            h += ',';
            h += g;
            h += std::to_string(i);
        }
    }
    return h;
}

DayFormat format_from_path(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return DayFormat::csv;
    if (ext == ".lobd") return DayFormat::binary;
    throw DataError("unknown day file extension: " + path.string());
}

Date date_from_path(const fs::path& path) {
    try {
        return Date::parse(path.stem().string());
    } catch (const std::invalid_argument& e) {
        throw DataError("day file name must be YYYYMMDD.(csv|lobd): " + path.string());
    }
}

std::string day_file_name(Date date, DayFormat format) {
    return date.str() + (format == DayFormat::csv ? ".csv" : ".lobd");
}

std::vector<RawRow> read_raw_rows(const fs::path& path, DayFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<RawRow> rows;

    if (format == DayFormat::binary) {
        char magic[sizeof(kBinaryMagic)];
        if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kBinaryMagic)) {
            throw DataError("bad magic in " + path.string());
        }
        constexpr std::size_t kRecord = 8 * kColumnCount;
        std::vector<unsigned char> buf(kRecord);
        while (true) {
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(kRecord));
            const auto got = static_cast<std::size_t>(in.gcount());
            if (got == 0) break;
            if (got != kRecord) throw DataError("truncated record in " + path.string());
            RawRow row;
            row.timestamp_ns = static_cast<std::int64_t>(detail::decode_u64(buf.data()));
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                row.values[i] = std::bit_cast<double>(detail::decode_u64(buf.data() + 8 * (i + 1)));
            }
            rows.push_back(row);
        }
        return rows;
    }

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file " + path.string());
    const auto header = csv::split(csv::trim_eol(line));
    if (header.size() != kColumnCount) {
        throw DataError("column count mismatch in header of " + path.string() + ": expected 81, got " +
                        std::to_string(header.size()));
    }
    if (header[0] != "timestamp_ns") throw DataError("first column must be timestamp_ns in " + path.string());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = csv::trim_eol(line);
        if (trimmed.empty()) continue;
        const auto fields = csv::split(trimmed);
        if (fields.size() != kColumnCount) {
            throw DataError("column count mismatch at " + path.string() + ":" + std::to_string(line_no) +
                            ": expected 81, got " + std::to_string(fields.size()));
        }
        RawRow row;
        try {
            row.timestamp_ns = csv::parse_int(fields[0]);
            for (std::size_t i = 0; i < row.values.size(); ++i) row.values[i] = csv::parse_double(fields[i + 1]);
        } catch (const std::invalid_argument& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(row);
    }
    return rows;
}

Ladder forward_fill_levels(std::span<const BookLevel> present) {
    if (present.empty()) throw std::invalid_argument("forward_fill_levels: empty side");
    Ladder out{};
    const std::size_t n = std::min(present.size(), kDepth);
    std::copy_n(present.begin(), n, out.begin());
    for (std::size_t i = n; i < kDepth; ++i) out[i] = {out[n - 1].price, 0.0};
    return out;
}

LoadedDay build_day(Date date, std::vector<RawRow> rows) {
    LoadedDay result;
    result.day.date = date;
    auto& q = result.quality;
    q.rows_in = rows.size();

    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawRow& a, const RawRow& b) { return a.timestamp_ns < b.timestamp_ns; });

    RunningMedian median_mid;
    bool have_prev = false;
    std::int64_t prev_ts = 0;
    result.day.snapshots.reserve(rows.size());

    for (auto& row : rows) {
        if (have_prev && row.timestamp_ns == prev_ts) {
            ++q.rows_dropped_duplicate_ts;
            continue;
        }
        have_prev = true;
        prev_ts = row.timestamp_ns;

        for (std::size_t off : {kBidSz, kAskSz}) {
            for (std::size_t i = 0; i < kDepth; ++i) {
                double& sz = row.values[off + i];
                if (!std::isfinite(sz) || sz < 0.0) {
                    sz = 0.0;
                    ++q.values_clipped;
                }
            }
        }

        if (!usable_price(row.values[kBidPx]) || !usable_price(row.values[kAskPx])) {
            ++q.rows_dropped_invalid_top;
            continue;
        }
        if (!(row.values[kAskPx] > row.values[kBidPx])) {
            ++q.rows_dropped_nonpositive_spread;
            continue;
        }

        Snapshot snap;
        snap.timestamp_ns = row.timestamp_ns;
        snap.bids = side_from_raw(row, kBidPx, kBidSz);
        snap.asks = side_from_raw(row, kAskPx, kAskSz);

        if (!median_mid.empty()) {
            const double m = median_mid.value();
            if (!within_band(snap.bids, m / 10.0, m * 10.0) || !within_band(snap.asks, m / 10.0, m * 10.0)) {
                ++q.rows_dropped_price_band;
                continue;
            }
        }
        if (!ladder_ordered(snap.bids, true) || !ladder_ordered(snap.asks, false)) {
            ++q.rows_dropped_unordered;
            continue;
        }

        median_mid.push(mid_price(snap));
        result.day.snapshots.push_back(snap);
    }

    q.rows_kept = result.day.snapshots.size();
    if (result.day.snapshots.empty()) {
        throw DataError("no rows survive quality filters for day " + date.str());
    }
    return result;
}

LoadedDay load_day(const fs::path& path, DayFormat format) {
    return build_day(date_from_path(path), read_raw_rows(path, format));
}

LoadedDay load_day(const fs::path& path) { return load_day(path, format_from_path(path)); }

void write_day(const DayBook& day, const fs::path& path, DayFormat format) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());

    auto flatten = [](const Snapshot& s) {
        std::array<double, 4 * kDepth> v{};
        for (std::size_t i = 0; i < kDepth; ++i) {
            v[kBidPx + i] = s.bids[i].price;
            v[kBidSz + i] = s.bids[i].size;
            v[kAskPx + i] = s.asks[i].price;
            v[kAskSz + i] = s.asks[i].size;
        }
        return v;
    };

    if (format == DayFormat::binary) {
        out.write(kBinaryMagic, sizeof(kBinaryMagic));
        for (const auto& s : day.snapshots) {
            detail::put_u64(out, static_cast<std::uint64_t>(s.timestamp_ns));
            for (double v : flatten(s)) detail::put_f64(out, v);
        }
    } else {
        std::string buf = csv_header();
        buf += '\n';
        for (const auto& s : day.snapshots) {
            buf += std::to_string(s.timestamp_ns);
            for (double v : flatten(s)) {
                buf += ',';
                csv::append_double(buf, v);
            }
            buf += '\n';
            if (buf.size() > (1u << 20)) {
                out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
                buf.clear();
            }
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::size_t index_at_or_after(const DayBook& day, std::int64_t t) {
    const auto& snaps = day.snapshots;
    if (snaps.empty() || t > snaps.back().timestamp_ns) {
        throw std::out_of_range("timestamp beyond end of day " + day.date.str());
    }
    const auto it = std::lower_bound(snaps.begin(), snaps.end(), t,
                                     [](const Snapshot& s, std::int64_t v) { return s.timestamp_ns < v; });
    return static_cast<std::size_t>(it - snaps.begin());
}

bool is_valid_snapshot(const Snapshot& s) noexcept {
    if (!usable_price(s.best_bid()) || !usable_price(s.best_ask())) return false;
    if (!(s.best_bid() < s.best_ask())) return false;
    for (const auto* ladder : {&s.bids, &s.asks}) {
        for (const auto& lvl : *ladder) {
            if (!(lvl.size >= 0.0) || !std::isfinite(lvl.size)) return false;
            if (lvl.size > 0.0 && !usable_price(lvl.price)) return false;
        }
    }
    return ladder_ordered(s.bids, true) && ladder_ordered(s.asks, false);
}

}  // namespace lobsim

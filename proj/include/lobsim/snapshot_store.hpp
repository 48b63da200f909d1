#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "lobsim/book.hpp"

namespace lobsim {

enum class DayFormat { csv, binary };

/// Per-file ingestion counters. rows_in == rows_kept + dropped_total().
struct QualityReport {
    std::uint64_t rows_in = 0;
    std::uint64_t rows_kept = 0;
    std::uint64_t rows_dropped_duplicate_ts = 0;
    std::uint64_t rows_dropped_invalid_top = 0;
    std::uint64_t rows_dropped_nonpositive_spread = 0;
    std::uint64_t rows_dropped_price_band = 0;
    std::uint64_t rows_dropped_unordered = 0;
    std::uint64_t values_clipped = 0;

    std::uint64_t dropped_total() const noexcept {
        return rows_dropped_duplicate_ts + rows_dropped_invalid_top +
               rows_dropped_nonpositive_spread + rows_dropped_price_band +
               rows_dropped_unordered;
    }
    bool reconciles() const noexcept { return rows_in == rows_kept + dropped_total(); }
};

struct LoadedDay {
    DayBook day;
    QualityReport quality;
};

/// Raw record as it sits on disk: timestamp plus 80 values in column order
/// bid_px[20], bid_sz[20], ask_px[20], ask_sz[20].
struct RawRow {
    std::int64_t timestamp_ns = 0;
    std::array<double, 4 * kDepth> values{};
};

inline constexpr std::size_t kColumnCount = 1 + 4 * kDepth;
inline constexpr char kBinaryMagic[5] = {'L', 'O', 'B', 'D', '1'};

/// Header line of the canonical CSV layout (81 columns).
std::string csv_header();

/// Infers the format from the extension (.csv or .lobd).
DayFormat format_from_path(const std::filesystem::path& path);

/// Parses "YYYYMMDD.csv" / "YYYYMMDD.lobd".
Date date_from_path(const std::filesystem::path& path);

std::string day_file_name(Date date, DayFormat format);

std::vector<RawRow> read_raw_rows(const std::filesystem::path& path, DayFormat format);

/// Applies the quality filters to raw rows of one day. Throws DataError when
/// nothing survives.
LoadedDay build_day(Date date, std::vector<RawRow> rows);

LoadedDay load_day(const std::filesystem::path& path, DayFormat format);
LoadedDay load_day(const std::filesystem::path& path);

/// Writes the canonical representation. Values use shortest round-trip
/// formatting so reloading yields an identical DayBook.
void write_day(const DayBook& day, const std::filesystem::path& path, DayFormat format);

/// Pads a best-first ladder to 20 levels. Missing levels get size 0 and repeat
/// the last present price. Requires at least one level.
Ladder forward_fill_levels(std::span<const BookLevel> present);

/// Smallest index whose timestamp is >= t. Throws std::out_of_range when t is
/// past the last snapshot.
std::size_t index_at_or_after(const DayBook& day, std::int64_t t);

/// Checks the Snapshot invariants (positive spread, strictly monotone ladders
/// over non-empty levels, finite positive prices where size > 0).
bool is_valid_snapshot(const Snapshot& s) noexcept;

}  // namespace lobsim

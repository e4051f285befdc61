#pragma once

// File formats.
//
// BTS1 stack layout, all values little-endian:
//
//   "BTS1" | u32 version (=1) | u32 N | u32 m | u8 axis flag
//   | f64 x N time axis (only when flag = 1)
//   | f32 x (N*m) samples, time-major (pixel index fastest)
//
// Flag 0 means the implicit axis 1..N. Sample bits are stored verbatim, so
// NaN payloads survive a round trip.
//
// Break maps are CSV with the header pixel,valid,detected,first_break,max_abs_mo.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "breakwatch/engine.hpp"
#include "breakwatch/model.hpp"

namespace breakwatch::dataio {

inline constexpr char kStackMagic[4] = {'B', 'T', 'S', '1'};
inline constexpr std::uint32_t kStackVersion = 1;
inline constexpr std::size_t kStackHeaderBytes = 17;

struct StackFileHeader {
    std::uint32_t version = kStackVersion;
    std::uint32_t observations = 0;
    std::uint32_t pixels = 0;
    bool explicit_axis = false;
};

/// Bytes written.
std::size_t write_stack(const engine::SeriesStack& stack, std::ostream& sink);
engine::SeriesStack read_stack(std::istream& source);

void save_stack(const engine::SeriesStack& stack, const std::filesystem::path& path);
engine::SeriesStack load_stack(const std::filesystem::path& path);

struct CsvSeries {
    model::TimeAxis axis;
    std::vector<float> values;
};

/// Two columns time,value; optional header line; an empty value is missing.
CsvSeries read_series_csv(std::istream& source);

/// Data rows written (one per pixel).
std::size_t write_break_map(const engine::BreakMap& map, std::ostream& sink);

}  // namespace breakwatch::dataio

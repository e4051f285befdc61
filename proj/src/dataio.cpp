#include "breakwatch/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "breakwatch/error.hpp"

namespace breakwatch::dataio {

namespace {

template <typename U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename U>
U get_le(const unsigned char* bytes) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(bytes[i]) << (8 * i);
    }
    return value;
}

void read_exact(std::istream& in, void* dst, std::size_t count, const char* what) {
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw FormatError(std::string("truncated stack file: ") + what);
    }
}

}  // namespace

std::size_t write_stack(const engine::SeriesStack& stack, std::ostream& sink) {
    const std::size_t n_obs = stack.observations();
    const std::size_t pixels = stack.pixels();
    if (n_obs > std::numeric_limits<std::uint32_t>::max() ||
        pixels > std::numeric_limits<std::uint32_t>::max()) {
        throw CapacityError("stack dimensions exceed the 32-bit header fields");
    }
    const bool explicit_axis = !stack.axis().is_regular();

    sink.write(kStackMagic, 4);
    put_le<std::uint32_t>(sink, kStackVersion);
    put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(n_obs));
    put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(pixels));
    put_le<std::uint8_t>(sink, explicit_axis ? 1 : 0);
    std::size_t bytes = kStackHeaderBytes;

    if (explicit_axis) {
        for (double t : stack.axis().values()) {
            put_le<std::uint64_t>(sink, std::bit_cast<std::uint64_t>(t));
        }
        bytes += 8 * n_obs;
    }

    // Encode in chunks so large stacks do not need a second full-size buffer.
    constexpr std::size_t kChunk = 1 << 16;
    std::vector<char> buffer(4 * std::min(kChunk, stack.data().size()));
    const auto data = stack.data();
    for (std::size_t off = 0; off < data.size(); off += kChunk) {
        const std::size_t count = std::min(kChunk, data.size() - off);
        for (std::size_t i = 0; i < count; ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(data[off + i]);
            for (std::size_t b = 0; b < 4; ++b) {
                buffer[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
            }
        }
        sink.write(buffer.data(), static_cast<std::streamsize>(4 * count));
    }
    bytes += 4 * data.size();

    if (!sink) {
        throw IoError("failed to write stack");
    }
    return bytes;
}

engine::SeriesStack read_stack(std::istream& source) {
    std::array<unsigned char, kStackHeaderBytes> head{};
    source.read(reinterpret_cast<char*>(head.data()), 4);
    if (source.gcount() != 4 || std::memcmp(head.data(), kStackMagic, 4) != 0) {
        throw FormatError("not a BTS1 stack file (bad magic)");
    }
    read_exact(source, head.data() + 4, kStackHeaderBytes - 4, "header");

    StackFileHeader header;
    header.version = get_le<std::uint32_t>(head.data() + 4);
    header.observations = get_le<std::uint32_t>(head.data() + 8);
    header.pixels = get_le<std::uint32_t>(head.data() + 12);
    const std::uint8_t flag = head[16];

    if (header.version != kStackVersion) {
        throw FormatError("unsupported stack version " + std::to_string(header.version));
    }
    if (header.observations < 2) {
        throw FormatError("stack needs N >= 2");
    }
    if (header.pixels < 1) {
        throw FormatError("stack needs m >= 1");
    }
    if (flag > 1) {
        throw FormatError("unknown time-axis flag " + std::to_string(flag));
    }
    header.explicit_axis = flag == 1;

    const std::size_t n_obs = header.observations;
    const std::size_t pixels = header.pixels;
    if (n_obs > std::numeric_limits<std::size_t>::max() / 4 / pixels ||
        n_obs * pixels > std::vector<float>().max_size()) {
        throw CapacityError("stack of " + std::to_string(n_obs) + " x " + std::to_string(pixels) +
                            " samples exceeds addressable size");
    }

    // Axis and payload grow chunk by chunk: a lying header on a short file
    // fails on truncation instead of on a giant allocation.
    constexpr std::size_t kChunk = 1 << 20;
    std::vector<double> axis_values;
    if (header.explicit_axis) {
        std::vector<unsigned char> raw(8 * std::min(n_obs, kChunk));
        for (std::size_t off = 0; off < n_obs; off += kChunk) {
            const std::size_t chunk = std::min(kChunk, n_obs - off);
            read_exact(source, raw.data(), 8 * chunk, "time axis");
            for (std::size_t i = 0; i < chunk; ++i) {
                axis_values.push_back(
                    std::bit_cast<double>(get_le<std::uint64_t>(raw.data() + 8 * i)));
            }
        }
    }

    const std::size_t count = n_obs * pixels;
    std::vector<float> data;
    data.reserve(std::min(count, kChunk));
    std::vector<unsigned char> raw(4 * std::min(count, kChunk));
    for (std::size_t off = 0; off < count; off += kChunk) {
        const std::size_t chunk = std::min(kChunk, count - off);
        read_exact(source, raw.data(), 4 * chunk, "sample payload");
        for (std::size_t i = 0; i < chunk; ++i) {
            data.push_back(std::bit_cast<float>(get_le<std::uint32_t>(raw.data() + 4 * i)));
        }
    }

    try {
        model::TimeAxis axis = header.explicit_axis ? model::TimeAxis(std::move(axis_values))
                                                    : model::TimeAxis::regular(n_obs);
        return engine::SeriesStack(std::move(axis), pixels, std::move(data));
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("invalid stack contents: ") + e.what());
    }
}

void save_stack(const engine::SeriesStack& stack, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_stack(stack, out);
    out.flush();
    if (!out) {
        throw IoError("failed to write " + path.string());
    }
}

engine::SeriesStack load_stack(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_stack(in);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& value) {
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

CsvSeries read_series_csv(std::istream& source) {
    std::vector<double> times;
    std::vector<float> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError(line_no, "expected two comma-separated columns");
        }
        const std::string_view time_text = trim(row.substr(0, comma));
        const std::string_view value_text = trim(row.substr(comma + 1));
        if (value_text.find(',') != std::string_view::npos) {
            throw ParseError(line_no, "expected two comma-separated columns");
        }

        double t = 0.0;
        if (!parse_double(time_text, t)) {
            if (times.empty() && line_no == 1) {
                continue;  // header
            }
            throw ParseError(line_no, "time value '" + std::string(time_text) + "' is not numeric");
        }
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!value_text.empty() && !parse_double(value_text, v)) {
            throw ParseError(line_no, "value '" + std::string(value_text) + "' is not numeric");
        }
        times.push_back(t);
        values.push_back(static_cast<float>(v));
    }
    try {
        return CsvSeries{model::TimeAxis(std::move(times)), std::move(values)};
    } catch (const InvalidArgument& e) {
        throw ParseError(line_no, e.what());
    }
}

std::size_t write_break_map(const engine::BreakMap& map, std::ostream& sink) {
    sink << "pixel,valid,detected,first_break,max_abs_mo\n";
    char number[64];
    for (std::size_t i = 0; i < map.results.size(); ++i) {
        const auto& r = map.results[i];
        sink << i << ',' << (map.valid[i] ? 1 : 0) << ',' << (r.detected ? 1 : 0) << ',';
        if (r.first_break) {
            sink << *r.first_break;
        }
        std::snprintf(number, sizeof number, "%.9g", r.max_abs_mo);
        sink << ',' << number << '\n';
    }
    if (!sink) {
        throw IoError("failed to write break map");
    }
    return map.results.size();
}

}  // namespace breakwatch::dataio

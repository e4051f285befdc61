#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (key, stream, position), so parallel consumers get reproducible
// substreams regardless of how work is split across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace breakwatch::random {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace detail

inline Counter philox4x32_10(Counter ctr, Key key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Domain tags keep substreams of different consumers apart for one seed.
enum class Domain : std::uint64_t {
    synthetic = 0x5359'4E54'4845'5449ull,
    calibration = 0x4341'4C49'4252'4154ull,
};

/// Standard-normal source addressed by (stream, position).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, Domain domain) {
        const std::uint64_t mixed = splitmix64(seed ^ static_cast<std::uint64_t>(domain));
        key_ = {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
    }

    /// Two independent N(0,1) draws for block `position` of `stream`.
    std::array<double, 2> pair(std::uint64_t stream, std::uint64_t position) const {
        const Counter out = philox4x32_10(
            {static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(position >> 32),
             static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
            key_);
        const std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        const std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
        const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    /// Element `index` of stream `stream`.
    double at(std::uint64_t stream, std::uint64_t index) const {
        return pair(stream, index / 2)[index % 2];
    }

private:
    Key key_{};
};

}  // namespace breakwatch::random

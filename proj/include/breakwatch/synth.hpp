#pragma once

// Synthetic evaluation stacks and the scaling benchmark driver.
//
//   y_t = 0.05 sin(2 pi t / f) + e_t + c * [pixel has a break and t is in the tail]
//
// e_t ~ N(0, noise_std^2). The first floor(break_ratio * m) pixels carry the
// break; the tail is the last round(break_frac * N) observations.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "breakwatch/engine.hpp"

namespace breakwatch::synth {

inline constexpr double kSeasonalAmplitude = 0.05;

struct SynthSpec {
    std::size_t pixels = 1000;
    std::size_t observations = 200;
    double frequency = 23.0;
    double noise_std = 0.01;
    double break_mag = 0.1;
    double break_frac = 0.4;
    double break_ratio = 0.5;
    std::uint64_t seed = 1;
    int threads = 0;
};

void validate(const SynthSpec& spec);

struct SynthStack {
    engine::SeriesStack stack;
    std::vector<std::uint8_t> truth;
};

SynthStack generate(const SynthSpec& spec);

/// Number of break-bearing pixels.
std::size_t break_pixels(const SynthSpec& spec) noexcept;
/// First 0-based time index that receives the break constant.
std::size_t break_start(const SynthSpec& spec) noexcept;

struct ScalingRow {
    std::size_t pixels = 0;
    engine::PhaseTimings timings;
};

/// One profiled run per pixel count on freshly generated data. The critical
/// value is resolved once, before the first run.
std::vector<ScalingRow> bench_scaling(std::span<const std::size_t> pixel_counts,
                                      const engine::MonitorConfig& config,
                                      const SynthSpec& spec_template);

/// m,ingest,model,predictions,residuals,mosum,breaks,total
void write_scaling_csv(std::span<const ScalingRow> rows, std::ostream& sink);

}  // namespace breakwatch::synth

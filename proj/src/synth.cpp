#include "breakwatch/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include <omp.h>

#include "breakwatch/error.hpp"
#include "breakwatch/random.hpp"

namespace breakwatch::synth {

void validate(const SynthSpec& spec) {
    if (spec.pixels < 1) {
        throw InvalidArgument("m must be >= 1");
    }
    if (spec.observations < 2) {
        throw InvalidArgument("N must be >= 2");
    }
    if (!(spec.frequency > 0.0)) {
        throw InvalidArgument("frequency must be positive");
    }
    if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
        throw InvalidArgument("noise std must be >= 0");
    }
    if (!std::isfinite(spec.break_mag)) {
        throw InvalidArgument("break magnitude must be finite");
    }
    if (!(spec.break_frac >= 0.0 && spec.break_frac <= 1.0)) {
        throw InvalidArgument("break fraction must lie in [0, 1]");
    }
    if (!(spec.break_ratio >= 0.0 && spec.break_ratio <= 1.0)) {
        throw InvalidArgument("break ratio must lie in [0, 1]");
    }
}

std::size_t break_pixels(const SynthSpec& spec) noexcept {
    return static_cast<std::size_t>(std::floor(spec.break_ratio * static_cast<double>(spec.pixels)));
}

std::size_t break_start(const SynthSpec& spec) noexcept {
    const auto tail = static_cast<std::size_t>(
        std::llround(spec.break_frac * static_cast<double>(spec.observations)));
    return spec.observations - std::min(tail, spec.observations);
}

SynthStack generate(const SynthSpec& spec) {
    validate(spec);
    const std::size_t total = spec.observations;
    const std::size_t pixels = spec.pixels;
    const std::size_t breaking = break_pixels(spec);
    const std::size_t tail_start = break_start(spec);

    std::vector<double> season(total);
    for (std::size_t t = 0; t < total; ++t) {
        const double time = static_cast<double>(t + 1);
        season[t] = kSeasonalAmplitude * std::sin(2.0 * time * std::numbers::pi / spec.frequency);
    }

    std::vector<float> data(total * pixels);
    const random::NormalStream normals(spec.seed, random::Domain::synthetic);
    const int workers = spec.threads > 0 ? spec.threads : omp_get_max_threads();

    // Pixel-parallel; each value depends only on (seed, pixel, t).
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t px = 0; px < static_cast<std::int64_t>(pixels); ++px) {
        const auto pixel = static_cast<std::size_t>(px);
        const bool has_break = pixel < breaking;
        for (std::size_t t = 0; t < total; t += 2) {
            std::array<double, 2> noise{0.0, 0.0};
            if (spec.noise_std > 0.0) {
                noise = normals.pair(pixel, t / 2);
            }
            for (std::size_t k = 0; k < 2 && t + k < total; ++k) {
                const std::size_t i = t + k;
                double v = season[i] + spec.noise_std * noise[k];
                if (has_break && i >= tail_start) {
                    v += spec.break_mag;
                }
                data[i * pixels + pixel] = static_cast<float>(v);
            }
        }
    }

    std::vector<std::uint8_t> truth(pixels, 0);
    std::fill_n(truth.begin(), breaking, std::uint8_t{1});
    return {engine::SeriesStack(model::TimeAxis::regular(total), pixels, std::move(data)),
            std::move(truth)};
}

std::vector<ScalingRow> bench_scaling(std::span<const std::size_t> pixel_counts,
                                      const engine::MonitorConfig& config,
                                      const SynthSpec& spec_template) {
    if (pixel_counts.empty()) {
        throw InvalidArgument("pixel count list is empty");
    }
    engine::MonitorConfig resolved = config;
    resolved.lambda = engine::resolve_lambda(config, spec_template.observations);

    std::vector<ScalingRow> rows;
    rows.reserve(pixel_counts.size());
    for (std::size_t m : pixel_counts) {
        SynthSpec spec = spec_template;
        spec.pixels = m;
        const SynthStack synthetic = generate(spec);
        auto [map, timings] = engine::profile_run(synthetic.stack, resolved);
        rows.push_back({m, timings});
    }
    return rows;
}

void write_scaling_csv(std::span<const ScalingRow> rows, std::ostream& sink) {
    sink << "m,ingest,model,predictions,residuals,mosum,breaks,total\n";
    char line[256];
    for (const auto& row : rows) {
        const auto& t = row.timings;
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.pixels,
                      t.ingest, t.model, t.predictions, t.residuals, t.mosum, t.breaks, t.total);
        sink << line;
    }
}

}  // namespace breakwatch::synth

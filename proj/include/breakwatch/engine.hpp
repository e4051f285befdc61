#pragma once

// Batch monitoring of a stack of pixel time series.
//
// Two backends share one contract. The fused backend builds the design and
// mapping matrices once and runs every phase as a pixel-parallel block
// kernel over time-major slabs. The naive backend repeats the complete
// per-series procedure for each pixel and serves as the reference.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "breakwatch/model.hpp"
#include "breakwatch/mosum.hpp"

namespace breakwatch::engine {

/// N x m float samples, time-major: value (t, pixel) at data[t * m + pixel].
/// Missing samples are quiet NaN.
class SeriesStack {
public:
    SeriesStack(model::TimeAxis axis, std::size_t pixels, std::vector<float> data);

    std::size_t observations() const noexcept { return axis_.size(); }
    std::size_t pixels() const noexcept { return pixels_; }
    const model::TimeAxis& axis() const noexcept { return axis_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    float at(std::size_t t, std::size_t pixel) const noexcept { return data_[t * pixels_ + pixel]; }

    /// Copy of one pixel's series.
    std::vector<float> series(std::size_t pixel) const;

private:
    model::TimeAxis axis_;
    std::size_t pixels_;
    std::vector<float> data_;
};

enum class Backend { fused, naive };

struct MonitorConfig {
    std::size_t history = 100;
    std::size_t bandwidth = 50;
    int harmonics = 3;
    double frequency = 23.0;
    double alpha = 0.05;
    /// Explicit critical value; simulated from (alpha, h/n, N/n) when absent.
    std::optional<double> lambda;
    Backend backend = Backend::fused;
    /// Worker count; 0 uses the OpenMP default.
    int threads = 0;
    /// Pixels per unit of parallel work in the fused backend.
    std::size_t block_pixels = 256;
    /// Keep the full (N-n) x m MOSUM matrix in the result.
    bool keep_mosum = false;
    std::size_t calibration_reps = 100000;
    std::uint64_t calibration_seed = 1;
};

void validate(const MonitorConfig& config, std::size_t observations);

struct BreakMap {
    std::vector<mosum::BreakResult> results;
    std::vector<std::uint8_t> valid;
    MonitorConfig config;
    double lambda = 0.0;
    /// Time-major (N-n) x m MOSUM values, only with config.keep_mosum.
    std::vector<double> mosum;

    std::size_t pixels() const noexcept { return results.size(); }
    std::size_t break_count() const noexcept;
};

struct PhaseTimings {
    double ingest = 0.0;
    double model = 0.0;
    double predictions = 0.0;
    double residuals = 0.0;
    double mosum = 0.0;
    double breaks = 0.0;
    double total = 0.0;

    double phase_sum() const noexcept {
        return ingest + model + predictions + residuals + mosum + breaks;
    }
};

/// Forward fill from the first finite value, then backward fill the leading
/// gap. Returns nullopt for an all-NaN series.
std::optional<std::vector<float>> fill_gaps(std::span<const float> series);

/// In-place variant; false (and the input untouched) for an all-NaN series.
bool fill_gaps_inplace(std::span<float> series);

/// config.lambda when present, otherwise the simulated critical value for
/// this configuration over `observations` samples.
double resolve_lambda(const MonitorConfig& config, std::size_t observations);

BreakMap monitor_batch(const SeriesStack& stack, const MonitorConfig& config);

/// monitor_batch with wall-clock phase timings. The critical value is
/// resolved before the clock starts.
std::pair<BreakMap, PhaseTimings> profile_run(const SeriesStack& stack, const MonitorConfig& config);

}  // namespace breakwatch::engine

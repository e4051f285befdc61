// Reference backend: the complete per-series procedure, repeated for every
// pixel. Nothing is shared between pixels except the critical value.

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

#include "breakwatch/error.hpp"
#include "engine_detail.hpp"

namespace breakwatch::engine::detail {

namespace {

enum Phase { kIngest, kModel, kPredictions, kResiduals, kMosum, kBreaks, kPhaseCount };

}  // namespace

BreakMap run_naive(const SeriesStack& stack, const MonitorConfig& config, double lambda,
                   PhaseTimings* timings) {
    const std::size_t total = stack.observations();
    const std::size_t pixels = stack.pixels();
    const std::size_t history = config.history;
    const std::size_t monitor = total - history;
    const int workers = worker_count(config.threads);

    BreakMap map;
    map.config = config;
    map.config.lambda = lambda;
    map.lambda = lambda;
    map.results.resize(pixels);
    map.valid.assign(pixels, 0);
    if (config.keep_mosum) {
        map.mosum.assign(monitor * pixels, 0.0);
    }

    std::vector<std::array<double, kPhaseCount>> spent(static_cast<std::size_t>(workers));
    for (auto& row : spent) {
        row.fill(0.0);
    }
    std::exception_ptr failure;
    std::size_t failed_pixel = pixels;

    const Stopwatch region;
#pragma omp parallel num_threads(workers)
    {
        auto& mine = spent[static_cast<std::size_t>(omp_get_thread_num())];
        Stopwatch clock;
        auto lap = [&](Phase phase) {
            if (timings) {
                mine[phase] += clock.seconds();
                clock = Stopwatch();
            }
        };

#pragma omp for schedule(dynamic, 64)
        for (std::int64_t px = 0; px < static_cast<std::int64_t>(pixels); ++px) {
            const auto pixel = static_cast<std::size_t>(px);
            try {
                clock = Stopwatch();
                std::vector<float> raw = stack.series(pixel);
                const bool ok = fill_gaps_inplace(raw);
                std::vector<double> y(raw.begin(), raw.end());
                lap(kIngest);
                if (!ok) {
                    map.results[pixel] = {};
                    continue;
                }
                map.valid[pixel] = 1;

                const auto design = model::build_design_matrix(stack.axis(), config.frequency,
                                                               config.harmonics);
                const auto fit = model::fit_history(design, y, history);
                lap(kModel);

                const auto fitted = model::predict(design, fit.beta);
                lap(kPredictions);

                std::vector<double> residuals(total);
                for (std::size_t t = 0; t < total; ++t) {
                    residuals[t] = y[t] - fitted[t];
                }
                lap(kResiduals);

                double magnitude = 0.0;
                for (std::size_t i = 0; i < history; ++i) {
                    magnitude = std::max(magnitude, std::abs(y[i]));
                }
                if (model::is_degenerate_scale(fit.sigma, magnitude)) {
                    throw DegenerateScaleError("pixel " + std::to_string(pixel) +
                                               " has an exactly fitted history (sigma = 0)");
                }
                mosum::MosumSeries series;
                series.history = history;
                series.mo = mosum::mosum_process(residuals, fit.sigma, history, config.bandwidth);
                lap(kMosum);

                series.bound = mosum::boundary_values(history, total, lambda);
                map.results[pixel] = mosum::detect(series);
                if (config.keep_mosum) {
                    for (std::size_t j = 0; j < monitor; ++j) {
                        map.mosum[j * pixels + pixel] = series.mo[j];
                    }
                }
                lap(kBreaks);
            } catch (...) {
#pragma omp critical(breakwatch_naive_failure)
                if (pixel < failed_pixel) {
                    failed_pixel = pixel;
                    failure = std::current_exception();
                }
            }
        }
    }
    const double wall = region.seconds();

    if (failure) {
        std::rethrow_exception(failure);
    }

    if (timings) {
        // Per-worker phase time, averaged over workers and capped at the
        // region's wall time.
        std::array<double, kPhaseCount> sum{};
        for (const auto& row : spent) {
            for (int i = 0; i < kPhaseCount; ++i) {
                sum[i] += row[i] / workers;
            }
        }
        double attributed = 0.0;
        for (double v : sum) {
            attributed += v;
        }
        const double scale = attributed > wall && attributed > 0.0 ? wall / attributed : 1.0;
        timings->ingest = sum[kIngest] * scale;
        timings->model = sum[kModel] * scale;
        timings->predictions = sum[kPredictions] * scale;
        timings->residuals = sum[kResiduals] * scale;
        timings->mosum = sum[kMosum] * scale;
        timings->breaks = sum[kBreaks] * scale;
    }
    return map;
}

}  // namespace breakwatch::engine::detail

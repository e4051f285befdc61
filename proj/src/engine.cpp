#include "breakwatch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "breakwatch/error.hpp"
#include "engine_detail.hpp"
#include "fused_kernels.hpp"

namespace breakwatch::engine {

SeriesStack::SeriesStack(model::TimeAxis axis, std::size_t pixels, std::vector<float> data)
    : axis_(std::move(axis)), pixels_(pixels), data_(std::move(data)) {
    if (pixels_ < 1) {
        throw InvalidArgument("a stack needs at least one pixel");
    }
    if (data_.size() / pixels_ != axis_.size() || data_.size() % pixels_ != 0) {
        throw InvalidArgument("stack data length " + std::to_string(data_.size()) +
                              " does not match N x m = " + std::to_string(axis_.size()) + " x " +
                              std::to_string(pixels_));
    }
}

std::vector<float> SeriesStack::series(std::size_t pixel) const {
    std::vector<float> out(observations());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = at(t, pixel);
    }
    return out;
}

std::size_t BreakMap::break_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const auto& r) { return r.detected; }));
}

void validate(const MonitorConfig& config, std::size_t observations) {
    if (config.harmonics < 1) {
        throw InvalidArgument("k must be >= 1");
    }
    if (!(config.frequency > 0.0) || !std::isfinite(config.frequency)) {
        throw InvalidArgument("frequency must be positive");
    }
    const std::size_t p = model::regressor_count(config.harmonics);
    if (config.history <= p) {
        throw InvalidArgument("history length n = " + std::to_string(config.history) +
                              " must exceed 2+2k = " + std::to_string(p));
    }
    if (config.history >= observations) {
        throw InvalidArgument("history length n = " + std::to_string(config.history) +
                              " must be smaller than the series length N = " +
                              std::to_string(observations));
    }
    if (config.bandwidth < 1 || config.bandwidth > config.history) {
        throw InvalidArgument("bandwidth must satisfy 1 <= h <= n (h = " +
                              std::to_string(config.bandwidth) +
                              ", n = " + std::to_string(config.history) + ")");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0, 1)");
    }
    if (config.lambda && (!(*config.lambda > 0.0) || !std::isfinite(*config.lambda))) {
        throw InvalidArgument("lambda must be positive");
    }
    if (config.block_pixels < 1) {
        throw InvalidArgument("block size must be positive");
    }
}

bool fill_gaps_inplace(std::span<float> series) {
    const auto first = std::find_if(series.begin(), series.end(),
                                    [](float v) { return !std::isnan(v); });
    if (first == series.end()) {
        return false;
    }
    std::fill(series.begin(), first, *first);
    float last = *first;
    for (auto it = first; it != series.end(); ++it) {
        if (std::isnan(*it)) {
            *it = last;
        } else {
            last = *it;
        }
    }
    return true;
}

std::optional<std::vector<float>> fill_gaps(std::span<const float> series) {
    std::vector<float> out(series.begin(), series.end());
    if (!fill_gaps_inplace(out)) {
        return std::nullopt;
    }
    return out;
}

double resolve_lambda(const MonitorConfig& config, std::size_t observations) {
    validate(config, observations);
    if (config.lambda) {
        return *config.lambda;
    }
    mosum::CriticalValueRequest req;
    req.alpha = config.alpha;
    req.n_sim = config.history;
    req.h_frac = static_cast<double>(config.bandwidth) / static_cast<double>(config.history);
    req.horizon = static_cast<double>(observations) / static_cast<double>(config.history);
    req.reps = config.calibration_reps;
    req.seed = config.calibration_seed;
    req.harmonics = config.harmonics;
    req.frequency = config.frequency;
    req.threads = config.threads;
    return mosum::critical_value(req);
}

namespace {

std::pair<BreakMap, PhaseTimings> run(const SeriesStack& stack, const MonitorConfig& config,
                                      bool profile) {
    validate(config, stack.observations());
    const double lambda = resolve_lambda(config, stack.observations());
    PhaseTimings timings;
    const detail::Stopwatch clock;
    BreakMap map = config.backend == Backend::fused
                       ? detail::run_fused(stack, config, lambda, profile ? &timings : nullptr)
                       : detail::run_naive(stack, config, lambda, profile ? &timings : nullptr);
    timings.total = clock.seconds();
    return {std::move(map), timings};
}

}  // namespace

BreakMap monitor_batch(const SeriesStack& stack, const MonitorConfig& config) {
    return run(stack, config, false).first;
}

std::pair<BreakMap, PhaseTimings> profile_run(const SeriesStack& stack, const MonitorConfig& config) {
    return run(stack, config, true);
}

namespace detail {

int worker_count(int requested) noexcept {
    return requested > 0 ? requested : omp_get_max_threads();
}

BreakMap run_fused(const SeriesStack& stack, const MonitorConfig& config, double lambda,
                   PhaseTimings* timings) {
    const std::size_t total = stack.observations();
    const std::size_t pixels = stack.pixels();
    const std::size_t history = config.history;
    const std::size_t monitor = total - history;
    const std::size_t p = model::regressor_count(config.harmonics);
    const std::size_t block = config.block_pixels;
    const int workers = worker_count(config.threads);

    PhaseTimings local;
    auto phase = [&](double& slot, auto&& body) {
        const Stopwatch clock;
        body();
        slot += clock.seconds();
    };

    BreakMap map;
    map.config = config;
    map.config.lambda = lambda;
    map.lambda = lambda;
    map.results.resize(pixels);
    map.valid.assign(pixels, 0);
    if (config.keep_mosum) {
        map.mosum.assign(monitor * pixels, 0.0);
    }

    model::DesignMatrix design;
    model::MappingMatrix mapping;
    phase(local.model, [&] {
        design = model::build_design_matrix(stack.axis(), config.frequency, config.harmonics);
        mapping = model::fit_mapping(design, history);
    });
    std::vector<double> bound;
    phase(local.breaks, [&] { bound = mosum::boundary_values(history, total, lambda); });

    // Slabs bound the working set; blocks inside a slab are the parallel unit.
    const std::size_t slab = std::min(pixels, block * static_cast<std::size_t>(workers));
    std::vector<double> y(total * slab);
    std::vector<double> resid(total * slab);
    std::vector<double> beta(p * slab);
    std::vector<double> sigma(slab);
    std::vector<double> magnitude(slab);
    std::vector<double> mo(monitor * slab);
    std::vector<std::uint8_t> valid(slab);
    std::vector<std::uint8_t> detected(slab);
    std::vector<std::int64_t> first(slab);
    std::vector<double> max_abs(slab);

    const float* source = stack.data().data();

    for (std::size_t s0 = 0; s0 < pixels; s0 += slab) {
        const std::size_t width = std::min(slab, pixels - s0);
        const auto blocks = static_cast<std::int64_t>((width + block - 1) / block);
        auto range = [&](std::int64_t b) {
            const std::size_t c0 = static_cast<std::size_t>(b) * block;
            return std::pair{c0, std::min(block, width - c0)};
        };

        phase(local.ingest, [&] {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::ingest_block(source + s0 + c0, pixels, total, y.data() + c0, slab,
                                      valid.data() + c0, w);
            }
        });

        phase(local.model, [&] {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::coefficients_block(mapping.m, y.data() + c0, slab, beta.data() + c0, slab, w);
            }
        });

        phase(local.predictions, [&] {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::predictions_block(design.x, beta.data() + c0, slab, resid.data() + c0, slab, w);
            }
        });

        phase(local.residuals, [&] {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::residuals_block(y.data() + c0, resid.data() + c0, slab, total, w);
            }
        });

        std::int64_t degenerate = std::numeric_limits<std::int64_t>::max();
        phase(local.mosum, [&] {
#pragma omp parallel for schedule(static) num_threads(workers) reduction(min : degenerate)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::scale_block(resid.data() + c0, y.data() + c0, slab, history, p,
                                     sigma.data() + c0, magnitude.data() + c0, w);
                for (std::size_t c = c0; c < c0 + w; ++c) {
                    if (!valid[c]) {
                        sigma[c] = 1.0;
                    } else if (model::is_degenerate_scale(sigma[c], magnitude[c])) {
                        degenerate = std::min(degenerate, static_cast<std::int64_t>(s0 + c));
                        sigma[c] = 1.0;
                    }
                }
                kernels::mosum_block(resid.data() + c0, slab, sigma.data() + c0, history,
                                     config.bandwidth, total, mo.data() + c0, slab, w);
            }
        });
        if (degenerate != std::numeric_limits<std::int64_t>::max()) {
            throw DegenerateScaleError("pixel " + std::to_string(degenerate) +
                                       " has an exactly fitted history (sigma = 0)");
        }

        phase(local.breaks, [&] {
#pragma omp parallel for schedule(static) num_threads(workers)
            for (std::int64_t b = 0; b < blocks; ++b) {
                const auto [c0, w] = range(b);
                kernels::breaks_block(mo.data() + c0, slab, bound.data(), monitor,
                                      detected.data() + c0, first.data() + c0,
                                      max_abs.data() + c0, w);
                for (std::size_t c = c0; c < c0 + w; ++c) {
                    mosum::BreakResult& out = map.results[s0 + c];
                    map.valid[s0 + c] = valid[c];
                    if (!valid[c]) {
                        out = {};
                        continue;
                    }
                    out.detected = detected[c] != 0;
                    out.max_abs_mo = max_abs[c];
                    if (out.detected) {
                        out.first_break = history + 1 + static_cast<std::size_t>(first[c]);
                    } else {
                        out.first_break.reset();
                    }
                }
                if (config.keep_mosum) {
                    for (std::size_t j = 0; j < monitor; ++j) {
                        for (std::size_t c = c0; c < c0 + w; ++c) {
                            map.mosum[j * pixels + s0 + c] = valid[c] ? mo[j * slab + c] : 0.0;
                        }
                    }
                }
            }
        });
    }

    if (timings) {
        *timings = local;
    }
    return map;
}

}  // namespace detail
}  // namespace breakwatch::engine

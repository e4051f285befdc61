#include "breakwatch/mosum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <omp.h>

#include "breakwatch/error.hpp"
#include "breakwatch/model.hpp"
#include "breakwatch/random.hpp"
#include "fused_kernels.hpp"

namespace breakwatch::mosum {

double log_plus(double x) noexcept {
    return x <= std::numbers::e ? 1.0 : std::log(x);
}

std::vector<double> mosum_process(std::span<const double> residuals, double sigma,
                                  std::size_t history, std::size_t bandwidth) {
    const std::size_t total = residuals.size();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("MOSUM scale sigma must be positive and finite");
    }
    if (bandwidth < 1 || bandwidth > history) {
        throw InvalidArgument("bandwidth h must satisfy 1 <= h <= n");
    }
    if (history >= total) {
        throw InvalidArgument("history length n must be smaller than the series length N");
    }

    std::vector<double> mo(total - history);
    kernels::mosum_block(residuals.data(), 1, &sigma, history, bandwidth, total, mo.data(), 1, 1);
    return mo;
}

std::vector<double> boundary_values(std::size_t history, std::size_t total, double lambda) {
    if (history < 1 || history >= total) {
        throw InvalidArgument("boundary needs 1 <= n < N");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("critical value lambda must be positive and finite");
    }
    std::vector<double> bound(total - history);
    for (std::size_t j = 0; j < bound.size(); ++j) {
        const double ratio = static_cast<double>(history + 1 + j) / static_cast<double>(history);
        bound[j] = lambda * std::sqrt(log_plus(ratio));
    }
    return bound;
}

BreakResult detect(const MosumSeries& series) {
    if (series.mo.size() != series.bound.size()) {
        throw InvalidArgument("MOSUM and boundary lengths differ");
    }
    if (series.mo.empty()) {
        throw InvalidArgument("empty monitor period");
    }
    BreakResult result;
    for (std::size_t j = 0; j < series.mo.size(); ++j) {
        const double magnitude = std::abs(series.mo[j]);
        result.max_abs_mo = std::max(result.max_abs_mo, magnitude);
        if (!result.detected && magnitude > series.bound[j]) {
            result.detected = true;
            result.first_break = series.history + 1 + j;
        }
    }
    return result;
}

void validate(const CriticalValueRequest& req) {
    if (!(req.alpha > 0.0 && req.alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0, 1)");
    }
    if (!(req.h_frac > 0.0 && req.h_frac <= 1.0)) {
        throw InvalidArgument("h-frac must lie in (0, 1]");
    }
    if (!(req.horizon > 1.0) || !std::isfinite(req.horizon)) {
        throw InvalidArgument("horizon N/n must exceed 1");
    }
    if (req.reps < kMinCalibrationReps) {
        throw InvalidArgument("at least " + std::to_string(kMinCalibrationReps) +
                              " replications are required");
    }
    const std::size_t p = model::regressor_count(req.harmonics);
    if (req.harmonics < 1 || req.n_sim <= p) {
        throw InvalidArgument("simulated history length must exceed 2+2k");
    }
    const auto total = static_cast<std::size_t>(std::llround(req.horizon * req.n_sim));
    const auto bandwidth = static_cast<std::size_t>(std::llround(req.h_frac * req.n_sim));
    if (total <= req.n_sim) {
        throw InvalidArgument("horizon leaves an empty monitor period");
    }
    if (bandwidth < 1) {
        throw InvalidArgument("h-frac rounds to an empty MOSUM window");
    }
}

std::vector<double> null_statistics(const CriticalValueRequest& req) {
    validate(req);
    const std::size_t n = req.n_sim;
    const auto total = static_cast<std::size_t>(std::llround(req.horizon * n));
    const auto bandwidth = static_cast<std::size_t>(std::llround(req.h_frac * n));
    const std::size_t monitor = total - n;

    const auto design =
        model::build_design_matrix(model::TimeAxis::regular(total), req.frequency, req.harmonics);
    const auto mapping = model::fit_mapping(design, n);
    const auto weights = boundary_values(n, total, 1.0);

    const random::NormalStream normals(req.seed, random::Domain::calibration);
    std::vector<double> stats(req.reps);
    const int workers = req.threads > 0 ? req.threads : omp_get_max_threads();
    const auto reps = static_cast<std::int64_t>(req.reps);

#pragma omp parallel num_threads(workers)
    {
        std::vector<double> y(total);
        std::vector<double> mo(monitor);
        std::vector<double> residuals(total);
#pragma omp for schedule(static)
        for (std::int64_t rep = 0; rep < reps; ++rep) {
            const auto stream = static_cast<std::uint64_t>(rep);
            for (std::size_t t = 0; t < total; t += 2) {
                const auto pair = normals.pair(stream, t / 2);
                y[t] = pair[0];
                if (t + 1 < total) {
                    y[t + 1] = pair[1];
                }
            }
            const auto fit = model::fit_history(design, mapping, y);
            const auto fitted = model::predict(design, fit.beta);
            for (std::size_t t = 0; t < total; ++t) {
                residuals[t] = y[t] - fitted[t];
            }
            kernels::mosum_block(residuals.data(), 1, &fit.sigma, n, bandwidth, total, mo.data(), 1, 1);
            double sup = 0.0;
            for (std::size_t j = 0; j < monitor; ++j) {
                sup = std::max(sup, std::abs(mo[j]) / weights[j]);
            }
            stats[static_cast<std::size_t>(rep)] = sup;
        }
    }
    return stats;
}

double upper_quantile(std::vector<double> sample, double alpha) {
    if (sample.empty()) {
        throw InvalidArgument("empty sample");
    }
    const double level = 1.0 - alpha;
    // the small offset keeps e.g. 0.95 * 100000 from rounding up to 95001
    auto rank = static_cast<std::size_t>(
        std::ceil(level * static_cast<double>(sample.size()) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sample.size());
    auto nth = sample.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(sample.begin(), nth, sample.end());
    return *nth;
}

double critical_value(const CriticalValueRequest& req) {
    return upper_quantile(null_statistics(req), req.alpha);
}

}  // namespace breakwatch::mosum

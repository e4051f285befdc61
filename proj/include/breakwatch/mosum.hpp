#pragma once

// MOSUM monitoring: moving sums of history-model residuals over the monitor
// period, the log-shaped boundary, the simulated critical value and the
// break decision.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace breakwatch::mosum {

/// log+(x) = 1 for x <= e, ln(x) otherwise.
double log_plus(double x) noexcept;

/// MO_t for t = n+1..N from residuals r_1..r_N, window s = t-h+1..t.
/// One initial window sum, then add-one/drop-one updates.
std::vector<double> mosum_process(std::span<const double> residuals, double sigma,
                                  std::size_t history, std::size_t bandwidth);

/// b_t = lambda * sqrt(log+(t/n)) for t = n+1..N.
std::vector<double> boundary_values(std::size_t history, std::size_t total, double lambda);

struct MosumSeries {
    std::vector<double> mo;
    std::vector<double> bound;
    std::size_t history = 0;
};

struct BreakResult {
    bool detected = false;
    /// Observation count index t in n+1..N of the first crossing.
    std::optional<std::size_t> first_break;
    double max_abs_mo = 0.0;

    friend bool operator==(const BreakResult&, const BreakResult&) = default;
};

/// |MO_t| > b_t (strict) anywhere means a break.
BreakResult detect(const MosumSeries& series);

struct CriticalValueRequest {
    double alpha = 0.05;
    double h_frac = 0.5;
    double horizon = 2.0;
    std::size_t n_sim = 100;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    int harmonics = 3;
    double frequency = 23.0;
    /// Worker count; 0 uses the OpenMP default. Does not affect the result.
    int threads = 0;
};

inline constexpr std::size_t kMinCalibrationReps = 1000;

void validate(const CriticalValueRequest& req);

/// sup_t |MO_t| / sqrt(log+(t/n)) for each simulated null replication, in
/// replication order.
std::vector<double> null_statistics(const CriticalValueRequest& req);

/// Empirical (1 - alpha) quantile of a statistic sample: the smallest sample
/// value whose empirical CDF reaches 1 - alpha.
double upper_quantile(std::vector<double> sample, double alpha);

/// lambda such that a null MOSUM crosses the boundary with probability alpha.
double critical_value(const CriticalValueRequest& req);

}  // namespace breakwatch::mosum

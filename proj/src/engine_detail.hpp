#pragma once

#include <chrono>

#include "breakwatch/engine.hpp"

namespace breakwatch::engine::detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

int worker_count(int requested) noexcept;

/// `timings` may be null; phases are then not recorded.
BreakMap run_fused(const SeriesStack& stack, const MonitorConfig& config, double lambda,
                   PhaseTimings* timings);
BreakMap run_naive(const SeriesStack& stack, const MonitorConfig& config, double lambda,
                   PhaseTimings* timings);

}  // namespace breakwatch::engine::detail

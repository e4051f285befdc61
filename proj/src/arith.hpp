#pragma once

namespace breakwatch {

/// acc + a * b, fused when the target has hardware FMA. The batched kernels
/// and the per-series reference both accumulate through this, so the two
/// round identically on any build.
inline double madd(double a, double b, double acc) noexcept {
#if defined(__FMA__)
    return __builtin_fma(a, b, acc);
#else
    return acc + a * b;
#endif
}

}  // namespace breakwatch

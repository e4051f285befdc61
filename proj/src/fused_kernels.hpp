#pragma once

// Block kernels of the fused backend. Buffers are time-major: element (t, c)
// of a block lives at data[t * ld + c], so the inner loops run over pixels.
// Each kernel performs, per pixel, exactly the same sequence of floating-point
// operations as the per-series reference path.

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace breakwatch::kernels {

/// Copies columns of a float stack into a double block, forward/backward
/// filling NaN gaps. All-NaN columns are zeroed and flagged invalid.
void ingest_block(const float* stack, std::size_t stack_ld, std::size_t total,
                  double* y, std::size_t ld, std::uint8_t* valid, std::size_t width);

/// beta(p, c) = sum_i mapping(p, i) * y(i, c), i ascending.
void coefficients_block(const Eigen::MatrixXd& mapping, const double* y, std::size_t ld,
                        double* beta, std::size_t ld_beta, std::size_t width);

/// fitted(t, c) = sum_p design(p, t) * beta(p, c), p ascending.
void predictions_block(const Eigen::MatrixXd& design, const double* beta, std::size_t ld_beta,
                       double* fitted, std::size_t ld, std::size_t width);

/// fitted <- y - fitted.
void residuals_block(const double* y, double* fitted, std::size_t ld, std::size_t total,
                     std::size_t width);

/// sigma(c) = sqrt(sum_{i<n} r(i, c)^2 / (n - regressors)); magnitude(c) = max_{i<n} |y(i, c)|.
void scale_block(const double* residuals, const double* y, std::size_t ld, std::size_t history,
                 std::size_t regressors, double* sigma, double* magnitude, std::size_t width);

/// mo(j, c) for j = 0..N-n-1, window of `bandwidth` residuals ending at t = n+1+j.
void mosum_block(const double* residuals, std::size_t ld, const double* sigma,
                 std::size_t history, std::size_t bandwidth, std::size_t total, double* mo,
                 std::size_t ld_mo, std::size_t width);

/// Per column: strict crossing flag, first crossing index j (or -1), max |mo|.
void breaks_block(const double* mo, std::size_t ld_mo, const double* bound, std::size_t monitor,
                  std::uint8_t* detected, std::int64_t* first, double* max_abs, std::size_t width);

}  // namespace breakwatch::kernels

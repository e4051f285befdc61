#include "fused_kernels.hpp"

#include "arith.hpp"

#include <algorithm>
#include <cmath>

namespace breakwatch::kernels {

namespace {

// Register tile of the product kernels.
constexpr std::size_t kRows = 4;
constexpr std::size_t kCols = 32;

}  // namespace

void ingest_block(const float* stack, std::size_t stack_ld, std::size_t total,
                  double* y, std::size_t ld, std::uint8_t* valid, std::size_t width) {
    for (std::size_t t = 0; t < total; ++t) {
        const float* __restrict src = stack + t * stack_ld;
        double* __restrict dst = y + t * ld;
        for (std::size_t c = 0; c < width; ++c) {
            dst[c] = static_cast<double>(src[c]);
        }
    }
    // forward fill
    for (std::size_t t = 1; t < total; ++t) {
        const double* __restrict prev = y + (t - 1) * ld;
        double* __restrict row = y + t * ld;
        for (std::size_t c = 0; c < width; ++c) {
            if (std::isnan(row[c])) {
                row[c] = prev[c];
            }
        }
    }
    // backward fill of the leading gap
    for (std::size_t t = total - 1; t-- > 0;) {
        const double* __restrict next = y + (t + 1) * ld;
        double* __restrict row = y + t * ld;
        for (std::size_t c = 0; c < width; ++c) {
            if (std::isnan(row[c])) {
                row[c] = next[c];
            }
        }
    }
    for (std::size_t c = 0; c < width; ++c) {
        valid[c] = std::isnan(y[c]) ? 0 : 1;
    }
    for (std::size_t c = 0; c < width; ++c) {
        if (!valid[c]) {
            for (std::size_t t = 0; t < total; ++t) {
                y[t * ld + c] = 0.0;
            }
        }
    }
}

namespace {

// Both product kernels are register-tiled: kRows outputs by kCols pixels
// accumulate in locals while the shared dimension streams past. Each output
// is still a single madd chain in ascending order, the same chain the scalar
// reference evaluates.

template <std::size_t Rows>
void coefficient_tile(const double* m, std::size_t p, std::size_t n, std::size_t r0,
                      const double* y, std::size_t ld, double* beta, std::size_t ld_beta) {
    double acc[Rows][kCols] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double* __restrict row = y + i * ld;
        for (std::size_t q = 0; q < Rows; ++q) {
            const double s = m[r0 + q + i * p];
            for (std::size_t c = 0; c < kCols; ++c) {
                acc[q][c] = madd(s, row[c], acc[q][c]);
            }
        }
    }
    for (std::size_t q = 0; q < Rows; ++q) {
        std::copy_n(acc[q], kCols, beta + (r0 + q) * ld_beta);
    }
}

template <std::size_t Rows>
void prediction_tile(const double* x, std::size_t p, std::size_t t0, const double* beta,
                     std::size_t ld_beta, double* fitted, std::size_t ld) {
    double acc[Rows][kCols] = {};
    for (std::size_t r = 0; r < p; ++r) {
        const double* __restrict row = beta + r * ld_beta;
        for (std::size_t q = 0; q < Rows; ++q) {
            const double s = x[r + (t0 + q) * p];
            for (std::size_t c = 0; c < kCols; ++c) {
                acc[q][c] = madd(s, row[c], acc[q][c]);
            }
        }
    }
    for (std::size_t q = 0; q < Rows; ++q) {
        std::copy_n(acc[q], kCols, fitted + (t0 + q) * ld);
    }
}

}  // namespace

void coefficients_block(const Eigen::MatrixXd& mapping, const double* y, std::size_t ld,
                        double* beta, std::size_t ld_beta, std::size_t width) {
    const auto p = static_cast<std::size_t>(mapping.rows());
    const auto n = static_cast<std::size_t>(mapping.cols());
    const double* m = mapping.data();
    std::size_t c0 = 0;
    for (; c0 + kCols <= width; c0 += kCols) {
        std::size_t r = 0;
        for (; r + kRows <= p; r += kRows) {
            coefficient_tile<kRows>(m, p, n, r, y + c0, ld, beta + c0, ld_beta);
        }
        for (; r < p; ++r) {
            coefficient_tile<1>(m, p, n, r, y + c0, ld, beta + c0, ld_beta);
        }
    }
    for (; c0 < width; ++c0) {
        for (std::size_t r = 0; r < p; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc = madd(m[r + i * p], y[i * ld + c0], acc);
            }
            beta[r * ld_beta + c0] = acc;
        }
    }
}

void predictions_block(const Eigen::MatrixXd& design, const double* beta, std::size_t ld_beta,
                       double* fitted, std::size_t ld, std::size_t width) {
    const auto p = static_cast<std::size_t>(design.rows());
    const auto total = static_cast<std::size_t>(design.cols());
    const double* x = design.data();
    std::size_t c0 = 0;
    for (; c0 + kCols <= width; c0 += kCols) {
        std::size_t t = 0;
        for (; t + kRows <= total; t += kRows) {
            prediction_tile<kRows>(x, p, t, beta + c0, ld_beta, fitted + c0, ld);
        }
        for (; t < total; ++t) {
            prediction_tile<1>(x, p, t, beta + c0, ld_beta, fitted + c0, ld);
        }
    }
    for (; c0 < width; ++c0) {
        for (std::size_t t = 0; t < total; ++t) {
            double acc = 0.0;
            for (std::size_t r = 0; r < p; ++r) {
                acc = madd(x[r + t * p], beta[r * ld_beta + c0], acc);
            }
            fitted[t * ld + c0] = acc;
        }
    }
}

void residuals_block(const double* y, double* fitted, std::size_t ld, std::size_t total,
                     std::size_t width) {
    for (std::size_t t = 0; t < total; ++t) {
        const double* __restrict obs = y + t * ld;
        double* __restrict out = fitted + t * ld;
        for (std::size_t c = 0; c < width; ++c) {
            out[c] = obs[c] - out[c];
        }
    }
}

void scale_block(const double* residuals, const double* y, std::size_t ld, std::size_t history,
                 std::size_t regressors, double* sigma, double* magnitude, std::size_t width) {
    std::fill_n(sigma, width, 0.0);
    std::fill_n(magnitude, width, 0.0);
    for (std::size_t i = 0; i < history; ++i) {
        const double* __restrict r = residuals + i * ld;
        const double* __restrict obs = y + i * ld;
        for (std::size_t c = 0; c < width; ++c) {
            sigma[c] += r[c] * r[c];
            magnitude[c] = std::max(magnitude[c], std::abs(obs[c]));
        }
    }
    const auto dof = static_cast<double>(history - regressors);
    for (std::size_t c = 0; c < width; ++c) {
        sigma[c] = std::sqrt(sigma[c] / dof);
    }
}

void mosum_block(const double* residuals, std::size_t ld, const double* sigma,
                 std::size_t history, std::size_t bandwidth, std::size_t total, double* mo,
                 std::size_t ld_mo, std::size_t width) {
    const std::size_t monitor = total - history;
    // first window: s = n+2-h .. n+1 (1-based), i.e. rows n+1-h .. n
    double* __restrict first = mo;
    std::fill_n(first, width, 0.0);
    for (std::size_t s = history + 1 - bandwidth; s <= history; ++s) {
        const double* __restrict r = residuals + s * ld;
        for (std::size_t c = 0; c < width; ++c) {
            first[c] += r[c];
        }
    }
    for (std::size_t j = 1; j < monitor; ++j) {
        const double* __restrict prev = mo + (j - 1) * ld_mo;
        double* __restrict cur = mo + j * ld_mo;
        const double* __restrict drop = residuals + (history + j - bandwidth) * ld;
        const double* __restrict add = residuals + (history + j) * ld;
        for (std::size_t c = 0; c < width; ++c) {
            cur[c] = prev[c] - drop[c] + add[c];
        }
    }
    const double root_n = std::sqrt(static_cast<double>(history));
    for (std::size_t j = 0; j < monitor; ++j) {
        double* __restrict cur = mo + j * ld_mo;
        for (std::size_t c = 0; c < width; ++c) {
            cur[c] = cur[c] / (sigma[c] * root_n);
        }
    }
}

void breaks_block(const double* mo, std::size_t ld_mo, const double* bound, std::size_t monitor,
                  std::uint8_t* detected, std::int64_t* first, double* max_abs, std::size_t width) {
    std::fill_n(detected, width, std::uint8_t{0});
    std::fill_n(first, width, std::int64_t{-1});
    std::fill_n(max_abs, width, 0.0);
    for (std::size_t j = 0; j < monitor; ++j) {
        const double* __restrict row = mo + j * ld_mo;
        const double b = bound[j];
        for (std::size_t c = 0; c < width; ++c) {
            const double a = std::abs(row[c]);
            max_abs[c] = std::max(max_abs[c], a);
            if (!detected[c] && a > b) {
                detected[c] = 1;
                first[c] = static_cast<std::int64_t>(j);
            }
        }
    }
}

}  // namespace breakwatch::kernels

#pragma once

// Season-trend design matrix and ordinary-least-squares history models.
//
// A series y_1..y_N is modelled as
//   y_t = a1 + a2 t + sum_j [ c_j sin(2 pi j t / f) + d_j cos(2 pi j t / f) ] + e_t
// and the coefficients are fitted on the first n observations only.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace breakwatch::model {

/// Strictly increasing observation times (index units or decimal days/years).
class TimeAxis {
public:
    explicit TimeAxis(std::vector<double> values);

    /// The regular axis 1, 2, ..., count.
    static TimeAxis regular(std::size_t count);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// True when the axis is exactly 1..N.
    bool is_regular() const noexcept;

    friend bool operator==(const TimeAxis&, const TimeAxis&) = default;

private:
    std::vector<double> values_;
};

/// Number of regressors for `harmonics` sine/cosine pairs.
constexpr std::size_t regressor_count(int harmonics) noexcept {
    return 2 + 2 * static_cast<std::size_t>(harmonics);
}

/// (2+2k) x N regressors, one column per observation.
struct DesignMatrix {
    Eigen::MatrixXd x;
    double frequency = 0.0;
    int harmonics = 0;

    std::size_t regressors() const noexcept { return static_cast<std::size_t>(x.rows()); }
    std::size_t observations() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// (2+2k) x n matrix M with beta = M * y_hist for every series sharing the design.
struct MappingMatrix {
    Eigen::MatrixXd m;
    std::size_t history = 0;
    /// True when the Gram factorisation was rejected and the SVD route was used.
    bool used_pseudo_inverse = false;
};

struct HistoryModel {
    std::vector<double> beta;
    double sigma = 0.0;
};

struct Harmonic {
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Condition-number ceiling for the Gram route before falling back to SVD.
inline constexpr double kGramConditionLimit = 1e12;
/// Relative singular-value cutoff of the pseudo-inverse fallback.
inline constexpr double kSingularCutoff = 1e-10;

DesignMatrix build_design_matrix(const TimeAxis& axis, double frequency, int harmonics);

MappingMatrix fit_mapping(const DesignMatrix& design, std::size_t history);

/// Coefficients and residual scale from the first `history` values of `y`.
HistoryModel fit_history(const DesignMatrix& design, std::span<const double> y, std::size_t history);

/// Same fit with a precomputed mapping; `y` needs at least mapping.history values.
HistoryModel fit_history(const DesignMatrix& design, const MappingMatrix& mapping,
                         std::span<const double> y);

std::vector<double> predict(const DesignMatrix& design, std::span<const double> beta);

std::vector<Harmonic> amplitude_phase(std::span<const double> beta, int harmonics);

/// A residual scale this small relative to the data is an exact fit.
bool is_degenerate_scale(double sigma, double history_magnitude) noexcept;

}  // namespace breakwatch::model

#include "breakwatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "arith.hpp"
#include "breakwatch/error.hpp"

namespace breakwatch::model {

TimeAxis::TimeAxis(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw InvalidArgument("time axis needs at least 2 values, got " +
                              std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("time axis value " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(values_[i] > values_[i - 1])) {
            throw InvalidArgument("time axis is not strictly increasing at index " +
                                  std::to_string(i));
        }
    }
}

TimeAxis TimeAxis::regular(std::size_t count) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = static_cast<double>(i + 1);
    }
    return TimeAxis(std::move(values));
}

bool TimeAxis::is_regular() const noexcept {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] != static_cast<double>(i + 1)) {
            return false;
        }
    }
    return true;
}

DesignMatrix build_design_matrix(const TimeAxis& axis, double frequency, int harmonics) {
    if (harmonics < 1) {
        throw InvalidArgument("harmonic term count must be >= 1, got " + std::to_string(harmonics));
    }
    if (!(frequency > 0.0) || !std::isfinite(frequency)) {
        throw InvalidArgument("frequency must be a positive finite number");
    }

    const auto rows = static_cast<Eigen::Index>(regressor_count(harmonics));
    const auto cols = static_cast<Eigen::Index>(axis.size());
    DesignMatrix design{Eigen::MatrixXd(rows, cols), frequency, harmonics};

    for (Eigen::Index i = 0; i < cols; ++i) {
        const double t = axis[static_cast<std::size_t>(i)];
        design.x(0, i) = 1.0;
        design.x(1, i) = t;
        for (int j = 1; j <= harmonics; ++j) {
            const double angle = 2.0 * std::numbers::pi * j * t / frequency;
            design.x(2 * j, i) = std::sin(angle);
            design.x(2 * j + 1, i) = std::cos(angle);
        }
    }
    return design;
}

namespace {

void check_history(const DesignMatrix& design, std::size_t history) {
    const std::size_t p = design.regressors();
    if (history <= p) {
        throw DegreesOfFreedomError("history length " + std::to_string(history) +
                                    " leaves no degrees of freedom for " + std::to_string(p) +
                                    " regressors");
    }
    if (history > design.observations()) {
        throw InvalidArgument("history length " + std::to_string(history) +
                              " exceeds the series length " +
                              std::to_string(design.observations()));
    }
}

double gram_condition(const Eigen::MatrixXd& gram) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const double smallest = solver.eigenvalues().minCoeff();
    const double largest = solver.eigenvalues().maxCoeff();
    if (!(smallest > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return largest / smallest;
}

}  // namespace

MappingMatrix fit_mapping(const DesignMatrix& design, std::size_t history) {
    check_history(design, history);

    const auto p = static_cast<Eigen::Index>(design.regressors());
    const auto n = static_cast<Eigen::Index>(history);
    const Eigen::MatrixXd xh = design.x.leftCols(n);

    Eigen::MatrixXd gram(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += xh(a, i) * xh(b, i);
            }
            gram(a, b) = acc;
            gram(b, a) = acc;
        }
    }

    MappingMatrix mapping;
    mapping.history = history;

    if (gram_condition(gram) <= kGramConditionLimit) {
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            mapping.m = llt.solve(xh);
            return mapping;
        }
    }

    // X_hist = U S V^T  =>  (X_hist X_hist^T)^{-1} X_hist = U S^{-1} V^T
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(xh, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double largest = s.size() > 0 ? s(0) : 0.0;
    if (!(largest > 0.0) || s(s.size() - 1) < kSingularCutoff * largest) {
        throw RankDeficiencyError("history design matrix is rank deficient");
    }
    mapping.m = svd.matrixU() * s.cwiseInverse().asDiagonal() * svd.matrixV().transpose();
    mapping.used_pseudo_inverse = true;
    return mapping;
}

HistoryModel fit_history(const DesignMatrix& design, std::span<const double> y,
                         std::size_t history) {
    const MappingMatrix mapping = fit_mapping(design, history);
    return fit_history(design, mapping, y);
}

HistoryModel fit_history(const DesignMatrix& design, const MappingMatrix& mapping,
                         std::span<const double> y) {
    const std::size_t p = design.regressors();
    const std::size_t n = mapping.history;
    if (y.size() < n) {
        throw InvalidArgument("series shorter than the history period");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i])) {
            throw InvalidArgument("history value " + std::to_string(i) + " is not finite");
        }
    }

    HistoryModel model;
    model.beta.assign(p, 0.0);
    for (std::size_t r = 0; r < p; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc = madd(mapping.m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)), y[i], acc);
        }
        model.beta[r] = acc;
    }

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fitted = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
            fitted = madd(design.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)),
                          model.beta[r], fitted);
        }
        const double residual = y[i] - fitted;
        ss += residual * residual;
    }
    model.sigma = std::sqrt(ss / static_cast<double>(n - p));
    return model;
}

std::vector<double> predict(const DesignMatrix& design, std::span<const double> beta) {
    const std::size_t p = design.regressors();
    if (beta.size() != p) {
        throw InvalidArgument("coefficient vector has length " + std::to_string(beta.size()) +
                              ", expected " + std::to_string(p));
    }
    std::vector<double> fitted(design.observations());
    for (std::size_t t = 0; t < fitted.size(); ++t) {
        double acc = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
            acc = madd(design.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)), beta[r],
                       acc);
        }
        fitted[t] = acc;
    }
    return fitted;
}

std::vector<Harmonic> amplitude_phase(std::span<const double> beta, int harmonics) {
    if (harmonics < 1 || beta.size() != regressor_count(harmonics)) {
        throw InvalidArgument("coefficient vector length does not match 2+2k");
    }
    std::vector<Harmonic> out;
    out.reserve(static_cast<std::size_t>(harmonics));
    for (int j = 1; j <= harmonics; ++j) {
        // beta pair is (gamma cos delta, gamma sin delta)
        const double c = beta[2 * static_cast<std::size_t>(j)];
        const double s = beta[2 * static_cast<std::size_t>(j) + 1];
        out.push_back({std::hypot(c, s), std::atan2(s, c)});
    }
    return out;
}

bool is_degenerate_scale(double sigma, double history_magnitude) noexcept {
    return !(sigma > 64.0 * std::numeric_limits<double>::epsilon() * history_magnitude);
}

}  // namespace breakwatch::model

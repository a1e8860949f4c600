#pragma once

#include <cmath>
#include <vector>

#include "mildhjb/model.hpp"
#include "mildhjb/util.hpp"

namespace mildhjb {

/// Diagonal Gaussian covariance with the pseudoinverse convention of the
/// Moore-Penrose square root: 1/sqrt(lambda_n) where lambda_n > 0 and 0 on
/// the kernel.
struct DiagCovariance {
    std::vector<double> lambda;

    explicit DiagCovariance(std::vector<double> l) : lambda(std::move(l)) {
        for (double v : lambda) require(v >= 0.0, "DiagCovariance: variance < 0");
    }

    int dim() const { return static_cast<int>(lambda.size()); }

    double sqrt_entry(int n) const { return std::sqrt(lambda[n]); }
    double pinv_sqrt_entry(int n) const {
        return lambda[n] > 0.0 ? 1.0 / std::sqrt(lambda[n]) : 0.0;
    }
};

// (1 - e^{-z}) / z with a series for small z.
inline double expm1_ratio(double z) {
    if (std::abs(z) < 1e-4)
        return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    return -std::expm1(-z) / z;
}

/// Entry n of Q_t: q_n (1 - e^{-2 alpha_n t}) / (2 alpha_n), with the value
/// q_n * t when alpha_n = 0.
inline DiagCovariance qt_diagonal(const DiagonalModel& model, double t) {
    require(t >= 0.0, "qt_diagonal: t must be >= 0");
    std::vector<double> lambda(model.dim());
    for (int n = 0; n < model.dim(); ++n)
        lambda[n] = model.q()[n] * t * expm1_ratio(2.0 * model.alpha()[n] * t);
    return DiagCovariance(std::move(lambda));
}

inline double trace_qt(const DiagonalModel& model, double t) {
    const auto cov = qt_diagonal(model, t);
    double s = 0.0;
    for (double v : cov.lambda) s += v;
    return s;
}

/// Upper bound Tr[Q_1] M^2 (e^{2 omega ([t]+1)} - 1) / (e^{2 omega} - 1),
/// M = 1, omega = -min alpha_n, with the omega = 0 agreement [t]+1.
inline double trace_qt_bound(const DiagonalModel& model, double t) {
    require(t >= 0.0, "trace_qt_bound: t must be >= 0");
    const double q1 = trace_qt(model, 1.0);
    const double omega = model.omega();
    const double k = std::floor(t) + 1.0;
    if (std::abs(omega) < 1e-12) return q1 * k;
    return q1 * std::expm1(2.0 * omega * k) / std::expm1(2.0 * omega);
}

}  // namespace mildhjb

#include "mildhjb/semigroup.hpp"

#include <cmath>

namespace mildhjb {

GammaOperator gamma_g(const DiagonalModel& model, double t) {
    require(t > 0.0, "gamma_g: t must be > 0");
    GammaOperator out;
    out.t = t;
    out.entries.resize(model.dim());
    out.op_norm = 0.0;
    for (int n = 0; n < model.dim(); ++n) {
        const double a = model.alpha()[n];
        const double q = model.q()[n];
        const double g = model.g()[n];
        double ratio;  // 2 alpha / (1 - e^{-2 t alpha}), := 1/t at alpha = 0
        if (a == 0.0) {
            ratio = 1.0 / t;
        } else {
            ratio = 2.0 * a / (-std::expm1(-2.0 * t * a));
        }
        const double entry = std::sqrt(ratio / q) * std::exp(-t * a) * g;
        out.entries[n] = entry;
        out.op_norm = std::max(out.op_norm, std::abs(entry));
    }
    return out;
}

double apply_semigroup(const DiagonalModel& model, double t, const ScalarField& phi,
                       const std::vector<double>& x, const QuadratureRule& rule) {
    require(t >= 0.0, "apply_semigroup: t must be >= 0");
    require(static_cast<int>(x.size()) == model.dim(),
            "apply_semigroup: dimension mismatch");
    if (t == 0.0) return phi(x);
    return expectation(qt_diagonal(model, t), model.apply_semigroup_matrix(t, x),
                       phi, rule);
}

std::vector<double> g_gradient_semigroup(const DiagonalModel& model, double t,
                                         const ScalarField& phi,
                                         const std::vector<double>& x,
                                         const QuadratureRule& rule) {
    require(t > 0.0, "g_gradient_semigroup: t must be > 0");
    require(static_cast<int>(x.size()) == model.dim(),
            "g_gradient_semigroup: dimension mismatch");
    const int d = model.dim();
    const DiagCovariance cov = qt_diagonal(model, t);
    const GammaOperator gamma = gamma_g(model, t);
    const std::vector<double> shift = model.apply_semigroup_matrix(t, x);

    std::vector<std::vector<double>> terms(d);
    std::vector<double> point(d);
    gaussian_nodes(cov, rule, [&](std::span<const double> y, double w) {
        for (int n = 0; n < d; ++n) point[n] = shift[n] + y[n];
        const double f = w * phi(point);
        for (int n = 0; n < d; ++n) {
            const double kern = gamma.entries[n] * y[n] * cov.pinv_sqrt_entry(n);
            terms[n].push_back(f * kern);
        }
    });
    std::vector<double> grad(d);
    for (int n = 0; n < d; ++n) grad[n] = pairwise_sum(terms[n]);
    return grad;
}

double cameron_martin_density(const DiagonalModel& model, double t,
                              const std::vector<double>& k, double s,
                              const std::vector<double>& y) {
    require(t > 0.0, "cameron_martin_density: t must be > 0");
    require(k.size() == y.size() && static_cast<int>(k.size()) == model.dim(),
            "cameron_martin_density: dimension mismatch");
    const DiagCovariance cov = qt_diagonal(model, t);
    const GammaOperator gamma = gamma_g(model, t);
    double inner = 0.0, norm2 = 0.0;
    for (int n = 0; n < model.dim(); ++n) {
        const double gk = gamma.entries[n] * k[n];
        inner += gk * y[n] * cov.pinv_sqrt_entry(n);
        norm2 += gk * gk;
    }
    return std::exp(s * inner - 0.5 * s * s * norm2);
}

SmoothingReport smoothing_estimate_check(const DiagonalModel& model, double t,
                                         const ScalarField& phi, double phi_norm,
                                         const std::vector<double>& x,
                                         const QuadratureRule& rule,
                                         double kappa_g,
                                         double gamma_norm_override) {
    const auto grad = g_gradient_semigroup(model, t, phi, x, rule);
    double g2 = 0.0;
    for (double v : grad) g2 += v * v;
    const double lhs = std::sqrt(g2);

    double gamma_norm = gamma_norm_override >= 0.0 ? gamma_norm_override
                                                   : gamma_g(model, t).op_norm;
    const double m = model.m();
    double bound;
    if (m == 0.0) {
        bound = gamma_norm * phi_norm;
    } else {
        double r = 0.0;
        for (double xa : x) r += xa * xa;
        const double growth = 1.0 + std::pow(std::sqrt(r), m);
        const double omega = model.omega();
        double time_factor = 1.0;
        if (omega > 1e-12) time_factor = std::exp(m * omega * t);
        else if (std::abs(omega) <= 1e-12) time_factor = 1.0 + std::pow(t, m / 2.0);
        bound = kappa_g * gamma_norm * growth * time_factor * phi_norm;
    }
    SmoothingReport rep;
    rep.gradient_norm = lhs;
    rep.bound = bound;
    rep.ratio = bound > 0.0 ? lhs / bound : (lhs > 0.0 ? HUGE_VAL : 0.0);
    rep.pass = lhs <= bound * (1.0 + 1e-9) + 1e-12;
    return rep;
}

double ou1d_sin_semigroup(const DiagonalModel& model, double t, double x) {
    require(model.dim() == 1, "ou1d_sin_semigroup: 1-D model required");
    const double qt = trace_qt(model, t);
    return std::exp(-0.5 * qt) * std::sin(std::exp(-model.alpha()[0] * t) * x);
}

double sup_gap_demo(const DiagonalModel& model, double t, double s, double window,
                    int scan_points) {
    require(model.dim() == 1, "sup_gap_demo: 1-D model required");
    require(model.alpha()[0] != 0.0, "sup_gap_demo: alpha must be nonzero");
    require(window > 0.0 && scan_points >= 2, "sup_gap_demo: bad scan window");
    double best = 0.0;
    for (int i = 0; i < scan_points; ++i) {
        const double x = -window + 2.0 * window * i / (scan_points - 1);
        const double gap =
            std::abs(ou1d_sin_semigroup(model, t, x) - ou1d_sin_semigroup(model, s, x));
        if (gap > best) best = gap;
    }
    return best;
}

}  // namespace mildhjb

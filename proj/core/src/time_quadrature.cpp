#include "mildhjb/time_quadrature.hpp"

#include <cmath>

#include "mildhjb/quadrature.hpp"

namespace mildhjb {

namespace {

// Composite Gauss-Legendre panels on [1, t_max], panel edges log-spaced.
void log_panels(double t_max, int n, std::vector<double>& nodes,
                std::vector<double>& weights) {
    if (t_max <= 1.0 || n < 2) return;
    const int pts = 8;
    const int panels = std::max(2, n / pts);
    const Quad1D gl = gauss_legendre01(pts);
    for (int p = 0; p < panels; ++p) {
        const double lo = std::exp(std::log(t_max) * p / panels);
        const double hi = std::exp(std::log(t_max) * (p + 1) / panels);
        for (int i = 0; i < pts; ++i) {
            nodes.push_back(lo + (hi - lo) * gl.nodes[i]);
            weights.push_back((hi - lo) * gl.weights[i]);
        }
    }
}

}  // namespace

TimeQuadrature TimeQuadrature::build(double lambda, double a, double a_G,
                                     const EnvelopeFit& env, double tol,
                                     int gauss_order, int log_nodes) {
    require(lambda > std::max(a, a_G), "TimeQuadrature: lambda <= max(a, a_G)");
    require(env.theta < 1.0, "TimeQuadrature: envelope exponent >= 1");
    require(tol > 0.0, "TimeQuadrature: tol must be > 0");

    TimeQuadrature tq;
    tq.theta_ = env.theta;
    tq.lambda_ = lambda;

    const double mu = std::min(lambda - a, lambda - a_G);
    // e^{-mu T} / mu <= tol / 10 fixes T_max.
    double t_max = std::log(10.0 / (tol * mu)) / mu;
    t_max = std::max(t_max, 2.0);
    tq.t_max_ = t_max;
    tq.tail_scalar_ = std::exp(-(lambda - a) * t_max) / (lambda - a);
    tq.tail_gradient_ = env.c * std::pow(t_max, -env.theta) *
                        std::exp(-(lambda - a_G) * t_max) / (lambda - a_G);

    const Quad1D gl = gauss_legendre01(gauss_order);
    tq.reg_nodes_ = gl.nodes;
    tq.reg_weights_ = gl.weights;
    log_panels(t_max, log_nodes, tq.reg_nodes_, tq.reg_weights_);

    // tanh-sinh rule on (0, 1]: converges fast for smooth integrands and for
    // the s^{-theta} gradient singularity alike.
    const int half = gauss_order;
    const double h = 4.0 / half;
    for (int k = -half; k <= half; ++k) {
        const double t = h * k;
        const double u = 1.5707963267948966 * std::sinh(t);
        const double s = 0.5 * (1.0 + std::tanh(u));
        const double w = 0.5 * h * 1.5707963267948966 * std::cosh(t) /
                         (std::cosh(u) * std::cosh(u));
        if (s > 0.0 && w > 0.0) {
            tq.sing_nodes_.push_back(s);
            tq.sing_weights_.push_back(w);
        }
    }
    log_panels(t_max, log_nodes, tq.sing_nodes_, tq.sing_weights_);
    return tq;
}

double TimeQuadrature::integrate(const std::function<double(double)>& f) const {
    std::vector<double> terms(reg_nodes_.size());
    for (std::size_t i = 0; i < reg_nodes_.size(); ++i)
        terms[i] = reg_weights_[i] * f(reg_nodes_[i]);
    return pairwise_sum(terms);
}

double TimeQuadrature::integrate_singular(const std::function<double(double)>& f) const {
    std::vector<double> terms(sing_nodes_.size());
    for (std::size_t i = 0; i < sing_nodes_.size(); ++i)
        terms[i] = sing_weights_[i] * f(sing_nodes_[i]);
    return pairwise_sum(terms);
}

}  // namespace mildhjb

#pragma once

#include <functional>
#include <vector>

#include "mildhjb/certificates.hpp"

namespace mildhjb {

/// Discretization of the ds integrals over (0, infinity): a Gauss rule on
/// (0, 1] (Gauss-Jacobi absorbing the s^{-theta} singularity of the gradient
/// kernel), log-spaced trapezoid nodes on [1, T_max], and an analytic
/// exponential tail bound beyond T_max.
class TimeQuadrature {
  public:
    /// lambda: discount; a / a_G: growth exponents of the semigroup bounds;
    /// env: gamma_G power-law envelope; tol: target tolerance (the tail is
    /// capped at tol/10).
    static TimeQuadrature build(double lambda, double a, double a_G,
                                const EnvelopeFit& env, double tol,
                                int gauss_order = 24, int log_nodes = 40);

    /// sum w_j f(s_j) over the smooth node set; f must include the e^{-lambda s}
    /// factor itself.
    double integrate(const std::function<double(double)>& f) const;

    /// Same over the singular node set: accurate when f(s) ~ s^{-theta} x smooth.
    double integrate_singular(const std::function<double(double)>& f) const;

    const std::vector<double>& regular_nodes() const { return reg_nodes_; }
    const std::vector<double>& regular_weights() const { return reg_weights_; }
    const std::vector<double>& singular_nodes() const { return sing_nodes_; }
    const std::vector<double>& singular_weights() const { return sing_weights_; }

    double t_max() const { return t_max_; }
    double tail_bound_scalar() const { return tail_scalar_; }
    double tail_bound_gradient() const { return tail_gradient_; }
    double theta() const { return theta_; }
    double lambda() const { return lambda_; }

  private:
    std::vector<double> reg_nodes_, reg_weights_;
    std::vector<double> sing_nodes_, sing_weights_;
    double t_max_ = 0.0;
    double tail_scalar_ = 0.0, tail_gradient_ = 0.0;
    double theta_ = 0.0;
    double lambda_ = 0.0;
};

}  // namespace mildhjb

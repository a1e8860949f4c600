#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mildhjb/covariance.hpp"
#include "mildhjb/util.hpp"

namespace mildhjb {

/// Nodes/weights of a 1-D quadrature; weights follow the probabilist
/// convention for Gauss-Hermite (they sum to 1).
struct Quad1D {
    std::vector<double> nodes, weights;
};

/// Gauss-Hermite for weight e^{-x^2/2}/sqrt(2 pi); exact for polynomials of
/// degree < 2n.
Quad1D gauss_hermite(int n);

/// Gauss-Legendre on [0, 1].
Quad1D gauss_legendre01(int n);

/// Gauss rule on [0, 1] for the weight s^{-theta}, theta in [0, 1): the
/// returned weights already include the singular factor, so
/// integral_0^1 s^{-theta} f(s) ds ~= sum w_i f(s_i).
Quad1D gauss_jacobi01(int n, double theta);

struct QuadratureRule {
    enum class Method { GaussHermite, MonteCarlo };
    Method method = Method::GaussHermite;
    int order = 16;               // per-axis Gauss-Hermite order
    long samples = 100000;        // Monte Carlo draw count
    std::uint64_t seed = 1;

    static QuadratureRule gauss_hermite_rule(int order);
    static QuadratureRule monte_carlo_rule(long samples, std::uint64_t seed);
    static QuadratureRule from_json(const std::string& text);
    std::string to_json() const;
};

/// Visit the integration points of N(0, cov): calls fn(y, w) with weights
/// summing to 1. Tensor Gauss-Hermite, or counter-based Monte Carlo.
void gaussian_nodes(const DiagCovariance& cov, const QuadratureRule& rule,
                    const std::function<void(std::span<const double>, double)>& fn);

/// integral phi(shift + y) N(0,cov)(dy).
double expectation(const DiagCovariance& cov, const std::vector<double>& shift,
                   const std::function<double(std::span<const double>)>& phi,
                   const QuadratureRule& rule);

/// count i.i.d. draws from N(0, cov); deterministic in (seed, index) and
/// independent of evaluation order. Row-major count x dim.
std::vector<double> sample_gaussian(const DiagCovariance& cov, long count,
                                    std::uint64_t seed);

}  // namespace mildhjb

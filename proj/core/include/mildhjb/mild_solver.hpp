#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "mildhjb/grid_field.hpp"
#include "mildhjb/model.hpp"
#include "mildhjb/quadrature.hpp"
#include "mildhjb/time_quadrature.hpp"

namespace mildhjb {

/// Nonlinearity F_0(x, y, z) with declared Lipschitz constant in (y, z)
/// jointly and growth |F_0| <= growth_const (1 + |x|^m + |y| + |z|).
struct HamiltonianSpec {
    std::function<double(std::span<const double> x, double y, std::span<const double> z)> f0;
    double lipschitz = 0.0;
    double growth_const = 1.0;
    double m = 0.0;

    /// Sampled sanity check of the declared constants on random probes;
    /// throws on violation.
    void validate(int dim, double box, int probes, std::uint64_t seed) const;
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> deltas;            // g_pair_norm of successive updates
    std::vector<double> contraction_ratios;
    double final_residual = 0.0;
    double gradient_consistency = 0.0;     // max |finite diff of u - v| probe
    double lambda = 0.0;
    double lambda0 = 0.0;
    double alpha_lambda = 0.0;
    double tail_bound = 0.0;

    std::string to_json() const;
};

/// Upsilon_1[u, v](x) = integral_0^inf e^{-lambda s}
///                      R_s[F_0(., u(.), v(.))](x) ds on the grid of u.
GridField upsilon1(const DiagonalModel& model, const HamiltonianSpec& F0,
                   const GridField& u, const GridField& v, double lambda,
                   const TimeQuadrature& tq, const QuadratureRule& rule,
                   int threads = 1);

/// Upsilon_2[u, v](x): same with D^G R_s, singular-node time quadrature.
GridField upsilon2(const DiagonalModel& model, const HamiltonianSpec& F0,
                   const GridField& u, const GridField& v, double lambda,
                   const TimeQuadrature& tq, const QuadratureRule& rule,
                   int threads = 1);

struct PicardConfig {
    double lambda = 0.0;
    GridSpec grid;
    double tol = 1e-6;
    int max_iter = 60;
    int threads = 1;
    double alpha_lambda = 0.0;  // contraction factor, for the stopping rule
    double lambda0 = 0.0;
};

struct PicardResult {
    GridField u;
    GridField v;
    SolveReport report;
};

/// Picard iteration of (u, v) <- (Upsilon_1, Upsilon_2)[u, v] from (0, 0),
/// stopping when the g-pair delta meets the a-posteriori contraction bound
/// tol (1 - alpha) / alpha (plain tol when alpha is not usable).
PicardResult solve_picard(const DiagonalModel& model, const HamiltonianSpec& F0,
                          const PicardConfig& cfg, const TimeQuadrature& tq,
                          const QuadratureRule& rule);

/// Weighted sup over the grid of |u - Upsilon_1[u, v]|: the defect in the
/// mild-solution integral identity.
double residual_check(const DiagonalModel& model, const HamiltonianSpec& F0,
                      double lambda, const GridField& u, const GridField& v,
                      const TimeQuadrature& tq, const QuadratureRule& rule,
                      int threads = 1);

}  // namespace mildhjb

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mildhjb/certificates.hpp"
#include "mildhjb/grid_field.hpp"
#include "mildhjb/mild_solver.hpp"
#include "mildhjb/model.hpp"
#include "mildhjb/sde.hpp"

namespace mildhjb {

/// Control set: either a ball of radius rho in R^dim (rho > 0) or an
/// explicit finite list of control points.
struct ControlSet {
    double rho = 0.0;
    int dim = 0;
    std::vector<std::vector<double>> grid;  // nonempty -> finite control set
};

/// Discounted control problem in the truncated eigenbasis. lcoef[j][n] holds
/// <L e_j^ctrl, e_n>; gl_coef the G-composed coefficients <G L e_j^ctrl, e_n>.
/// Running cost l(x, eta) = beta1(x) + |eta|^2 / 2.
struct ControlProblem {
    DiagonalModel model;
    ControlSet ctrl;
    std::vector<std::vector<double>> lcoef;
    std::vector<std::vector<double>> gl_coef;
    std::function<double(std::span<const double>)> beta1;
    double beta1_weighted_sup = 1.0;  // sup |beta1(x)| / (1+|x|^m)
    double lambda = 1.0;

    void validate() const;
    /// Lipschitz constant of F_0 in q: rho * |Lcoef| (spectral norm), or the
    /// max |L eta| over a finite control grid.
    double f0_lipschitz() const;
    /// Closed-loop drift coefficient (G L eta)_n.
    void gl_apply(std::span<const double> eta, std::span<double> out) const;
};

struct HamiltonianValue {
    double value = 0.0;
    std::vector<double> eta;
};

/// F_0(x, q) = beta1(x) + inf over the control set of <L eta, q> + |eta|^2/2,
/// with the closed-form ball projection for the quadratic cost, and the
/// minimizing control.
HamiltonianValue hamiltonian_f0(const ControlProblem& problem,
                                std::span<const double> x,
                                std::span<const double> q);

/// Neumann boundary-control heat model on (0, pi): alpha_n = n^2,
/// g_n = (delta + n^2)^{1/4+eps}; the control operator coefficients come from
/// a finite-difference solve of the delta-harmonic two-point boundary value
/// problem projected on the orthonormal cosine basis.
struct NeumannModel {
    DiagonalModel model;
    std::vector<std::vector<double>> lcoef;    // 2 x N
    std::vector<std::vector<double>> gl_coef;  // 2 x N
    double delta = 0.0, eps = 0.0;
};

NeumannModel neumann_model(double delta, double eps, int N,
                           const std::vector<double>& noise_q, int bvp_mesh = 10000);

/// Neumann-map coefficients <N_delta eta, e_hat_n> for boundary data
/// eta = (eta_0, eta_pi), by the finite-difference BVP solve.
std::vector<double> neumann_map_coefficients(double delta, const std::vector<double>& eta,
                                             int N, int bvp_mesh = 10000);

struct NeumannEstimateReport {
    bool pass = false;
    double c0 = 0.0;
    double worst_ratio = 0.0;  // max over t of lhs/rhs
    std::vector<double> t_grid, lhs, rhs;
};

/// sup_{1<=n<=N} 2 n^2 (delta+n^2)^{2 beta} / (e^{2 t n^2} - 1)
///   <= C_0 / t^{1+2 beta},   beta = 1/4 + eps,
/// C_0 = 2 (1+delta)^{2 beta} sup_{s>0} s^{1+2 beta} / (e^{2s} - 1).
/// c0_scale rescales C_0 for fault-injection tests.
NeumannEstimateReport neumann_estimate_check(double delta, double eps, int N,
                                             const std::vector<double>& t_grid,
                                             double c0_scale = 1.0);

struct HjbResult {
    GridField u;
    GridField v;
    SolveReport report;
    CertificateReport certificate;
};

struct HjbConfig {
    GridSpec grid;
    QuadratureRule rule;
    double tol = 1e-6;
    int max_iter = 60;
    int threads = 1;
};

/// Certify the model, then delegate to the Picard mild solver with the
/// Hamiltonian built from hamiltonian_f0.
HjbResult solve_hjb(const ControlProblem& problem, const HjbConfig& cfg);

using Policy = std::function<std::vector<double>(std::span<const double>)>;

/// x -> argmin of the Hamiltonian at (x, v(x)).
Policy feedback_policy(const ControlProblem& problem, const GridField& v);

struct PolicyValue {
    double value = 0.0;
    double stderr_ = 0.0;
    double tail_bound = 0.0;
};

/// Monte Carlo discounted cost of the closed-loop SDE under the given policy.
PolicyValue evaluate_policy(const ControlProblem& problem, const Policy& policy,
                            const std::vector<double>& x, double T, double dt,
                            long count, std::uint64_t seed, int threads = 1);

struct DpOracleConfig {
    double xmax = 3.0;
    int state_nodes = 201;
    int control_nodes = 9;  // per control axis
    double dt = 1e-3;
};

/// Kushner-Dupuis Markov chain approximation + value iteration, d <= 2.
/// Independent of the semigroup/Picard machinery.
GridField dp_oracle(const ControlProblem& problem, const DpOracleConfig& cfg);

}  // namespace mildhjb

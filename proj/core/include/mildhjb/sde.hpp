#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mildhjb/model.hpp"
#include "mildhjb/semigroup.hpp"

namespace mildhjb {

/// Drift b and diagonal diffusion coefficient. sigma defaults to the constant
/// diagonal sqrt(q_n) of the model; a state-dependent diagonal may be
/// supplied together with its inverse bound C_0 (needed for the
/// Bismut-Elworthy-Li weight).
struct DriftSpec {
    std::function<void(std::span<const double> x, std::span<double> out)> b;
    double lipschitz = 0.0;
    // state-dependent diagonal sigma(x)_n; empty means constant sqrt(q_n)
    std::function<double(std::span<const double> x, int n)> sigma_diag;
    double sigma_inverse_bound = 0.0;  // C_0; required for BEL

    static DriftSpec zero(int dim);

    /// Sampled Lipschitz check of b; throws on violation.
    void validate(int dim, double box, int probes, std::uint64_t seed) const;
};

/// Simulated paths, row-major [path][step][coordinate], including the initial
/// state at step 0. Bit-reproducible for fixed (seed, dt, scheme).
struct PathBatch {
    long count = 0;
    int steps = 0;
    int dim = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::vector<double> data;

    double at(long path, int step, int n) const {
        return data[(static_cast<std::size_t>(path) * (steps + 1) + step) * dim + n];
    }
};

/// Exponential Euler for the mild SDE: X_{k+1} = e^{dt A} X_k
/// + Phi(dt) b(X_k) + eta_k, where Phi(dt) is the diagonal of
/// integral_0^dt e^{sA} ds; for constant sigma the convolution noise eta_k is
/// drawn with its exact covariance Q_dt.
PathBatch simulate_mild(const DiagonalModel& model, const DriftSpec& drift,
                        const std::vector<double>& x, double T, double dt,
                        long count, std::uint64_t seed, int threads = 1);

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// P_s[phi](x) by Monte Carlo over simulated endpoints.
McEstimate mc_semigroup(const DiagonalModel& model, const DriftSpec& drift,
                        double s, const ScalarField& phi,
                        const std::vector<double>& x, double dt, long count,
                        std::uint64_t seed, int threads = 1);

/// Variational (directional derivative) process Y coupled to X by shared
/// noise; returns X and Y batches. Y(0) = h.
struct CoupledBatch {
    PathBatch x;
    PathBatch y;
};

CoupledBatch variational_process(const DiagonalModel& model, const DriftSpec& drift,
                                 const std::vector<double>& x,
                                 const std::vector<double>& h, double T, double dt,
                                 long count, std::uint64_t seed, int threads = 1);

/// Bismut-Elworthy-Li gradient estimator:
/// <grad P_s[phi](x), h> ~ mean of phi(X(s)) U^h with
/// U^h = (1/s) sum_k <sigma(X_k)^{-1} Y_k, dW_k>.
McEstimate bel_gradient(const DiagonalModel& model, const DriftSpec& drift,
                        double s, const ScalarField& phi,
                        const std::vector<double>& x, const std::vector<double>& h,
                        double dt, long count, std::uint64_t seed, int threads = 1);

}  // namespace mildhjb

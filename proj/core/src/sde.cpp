#include "mildhjb/sde.hpp"

#include <cmath>

#include "mildhjb/covariance.hpp"
#include "mildhjb/rng.hpp"

namespace mildhjb {

DriftSpec DriftSpec::zero(int dim) {
    DriftSpec d;
    d.b = [dim](std::span<const double>, std::span<double> out) {
        for (int n = 0; n < dim; ++n) out[n] = 0.0;
    };
    d.lipschitz = 0.0;
    return d;
}

void DriftSpec::validate(int dim, double box, int probes, std::uint64_t seed) const {
    CounterRng rng(seed, 0);
    std::vector<double> x1(dim), x2(dim), b1(dim), b2(dim);
    std::uint64_t c = 0;
    for (int p = 0; p < probes; ++p) {
        double dx = 0.0;
        for (int n = 0; n < dim; ++n) {
            x1[n] = box * (2.0 * rng.uniform(c++) - 1.0);
            x2[n] = box * (2.0 * rng.uniform(c++) - 1.0);
            dx += (x1[n] - x2[n]) * (x1[n] - x2[n]);
        }
        b(x1, b1);
        b(x2, b2);
        double db = 0.0;
        for (int n = 0; n < dim; ++n) db += (b1[n] - b2[n]) * (b1[n] - b2[n]);
        require(std::sqrt(db) <= lipschitz * std::sqrt(dx) * (1.0 + 1e-9) + 1e-12,
                "DriftSpec: sampled Lipschitz violation");
    }
}

namespace {

struct StepCoefficients {
    std::vector<double> decay;       // e^{-alpha_n dt}
    std::vector<double> phi;         // integral_0^dt e^{-alpha_n s} ds
    std::vector<double> noise_corr;  // Cov(eta_n, dW_n) / dt
    std::vector<double> noise_resid; // sqrt(Var(eta_n) - Cov^2 / dt)
    double sqrt_dt;
};

// Exact joint law of (dW_n, eta_n) per step for constant sigma = sqrt(q_n):
//   Var(eta_n)      = q_n (1 - e^{-2 alpha_n dt}) / (2 alpha_n)
//   Cov(eta_n, dW_n) = sqrt(q_n) (1 - e^{-alpha_n dt}) / alpha_n
// so eta_n = (Cov/dt) dW_n + resid * xi with an independent xi.
StepCoefficients make_step_coefficients(const DiagonalModel& model, double dt) {
    const int d = model.dim();
    StepCoefficients sc;
    sc.decay.resize(d);
    sc.phi.resize(d);
    sc.noise_corr.resize(d);
    sc.noise_resid.resize(d);
    sc.sqrt_dt = std::sqrt(dt);
    const DiagCovariance qdt = qt_diagonal(model, dt);
    for (int n = 0; n < d; ++n) {
        const double a = model.alpha()[n];
        sc.decay[n] = std::exp(-a * dt);
        sc.phi[n] = dt * expm1_ratio(a * dt);
        const double cov = std::sqrt(model.q()[n]) * sc.phi[n];
        sc.noise_corr[n] = cov / dt;
        const double resid2 = qdt.lambda[n] - cov * cov / dt;
        sc.noise_resid[n] = std::sqrt(std::max(0.0, resid2));
    }
    return sc;
}

struct PathState {
    std::vector<double> x, y;     // state and variational state
    std::vector<double> dw;       // Brownian increment of the current step
    double u_weight = 0.0;        // running BEL Ito sum
};

// One exponential Euler step; advances x (and y when tracking the variational
// process) and accumulates the BEL integrand if requested.
void advance(const DiagonalModel& model, const DriftSpec& drift,
             const StepCoefficients& sc, const CounterRng& rng, int step,
             double dt, bool track_variation, bool track_bel, PathState& st,
             std::vector<double>& scratch_b, std::vector<double>& scratch_b2) {
    const int d = model.dim();
    const std::uint64_t base = static_cast<std::uint64_t>(step) * 2 * d;

    for (int n = 0; n < d; ++n)
        st.dw[n] = sc.sqrt_dt * rng.normal(base + 2 * n);

    if (track_bel) {
        // Left-point Ito sum <sigma(X_k)^{-1} Y_k, dW_k>.
        for (int n = 0; n < d; ++n) {
            const double sig = drift.sigma_diag
                                   ? drift.sigma_diag(st.x, n)
                                   : std::sqrt(model.q()[n]);
            st.u_weight += st.y[n] / sig * st.dw[n];
        }
    }

    drift.b(st.x, scratch_b);

    if (track_variation) {
        // Directional derivative of b along y by forward differences.
        double xn = 0.0;
        for (double v : st.x) xn += v * v;
        const double eps = 1e-6 * (1.0 + std::sqrt(xn));
        std::vector<double>& xpert = scratch_b2;
        xpert.assign(st.x.begin(), st.x.end());
        for (int n = 0; n < d; ++n) xpert[n] += eps * st.y[n];
        std::vector<double> bpert(d);
        drift.b(xpert, bpert);
        for (int n = 0; n < d; ++n) {
            double noise_term = 0.0;
            if (drift.sigma_diag) {
                const double dsig =
                    (drift.sigma_diag(xpert, n) - drift.sigma_diag(st.x, n)) / eps;
                noise_term = sc.decay[n] * dsig * st.dw[n];
            }
            st.y[n] = sc.decay[n] * st.y[n] +
                      sc.phi[n] * (bpert[n] - scratch_b[n]) / eps + noise_term;
        }
    }

    for (int n = 0; n < d; ++n) {
        double eta;
        if (drift.sigma_diag) {
            eta = sc.decay[n] * drift.sigma_diag(st.x, n) * st.dw[n];
        } else {
            eta = sc.noise_corr[n] * st.dw[n] +
                  sc.noise_resid[n] * rng.normal(base + 2 * n + 1);
        }
        st.x[n] = sc.decay[n] * st.x[n] + sc.phi[n] * scratch_b[n] + eta;
    }
}

int step_count(double T, double dt) {
    return static_cast<int>(std::llround(T / dt));
}

}  // namespace

PathBatch simulate_mild(const DiagonalModel& model, const DriftSpec& drift,
                        const std::vector<double>& x, double T, double dt,
                        long count, std::uint64_t seed, int threads) {
    require(dt > 0.0, "simulate_mild: dt must be > 0");
    require(T >= dt, "simulate_mild: T must be >= dt");
    require(count >= 1, "simulate_mild: count must be >= 1");
    require(static_cast<int>(x.size()) == model.dim(),
            "simulate_mild: dimension mismatch");
    const int d = model.dim();
    const int steps = step_count(T, dt);
    const StepCoefficients sc = make_step_coefficients(model, dt);

    PathBatch batch;
    batch.count = count;
    batch.steps = steps;
    batch.dim = d;
    batch.dt = dt;
    batch.seed = seed;
    batch.scheme = "exponential-euler";
    batch.data.resize(static_cast<std::size_t>(count) * (steps + 1) * d);

    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t p) {
        CounterRng rng(seed, p);
        PathState st;
        st.x = x;
        st.dw.resize(d);
        std::vector<double> b1(d), b2(d);
        double* row = batch.data.data() + p * (steps + 1) * d;
        for (int n = 0; n < d; ++n) row[n] = x[n];
        for (int k = 0; k < steps; ++k) {
            advance(model, drift, sc, rng, k, dt, false, false, st, b1, b2);
            for (int n = 0; n < d; ++n) row[(k + 1) * d + n] = st.x[n];
        }
    });
    return batch;
}

McEstimate mc_semigroup(const DiagonalModel& model, const DriftSpec& drift,
                        double s, const ScalarField& phi,
                        const std::vector<double>& x, double dt, long count,
                        std::uint64_t seed, int threads) {
    require(s > 0.0, "mc_semigroup: s must be > 0");
    require(count >= 2, "mc_semigroup: count must be >= 2 for a standard error");
    const int d = model.dim();
    const int steps = step_count(s, dt);
    require(steps >= 1, "mc_semigroup: dt too large for horizon");
    const StepCoefficients sc = make_step_coefficients(model, dt);

    std::vector<double> samples(count);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t p) {
        CounterRng rng(seed, p);
        PathState st;
        st.x = x;
        st.dw.resize(d);
        std::vector<double> b1(d), b2(d);
        for (int k = 0; k < steps; ++k)
            advance(model, drift, sc, rng, k, dt, false, false, st, b1, b2);
        samples[p] = phi(st.x);
    });
    const double mean = pairwise_sum(samples) / count;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    McEstimate est;
    est.value = mean;
    est.stderr_ = std::sqrt(ss / (count - 1) / count);
    return est;
}

CoupledBatch variational_process(const DiagonalModel& model, const DriftSpec& drift,
                                 const std::vector<double>& x,
                                 const std::vector<double>& h, double T, double dt,
                                 long count, std::uint64_t seed, int threads) {
    require(dt > 0.0, "variational_process: dt must be > 0");
    require(T >= dt, "variational_process: T must be >= dt");
    require(h.size() == x.size(), "variational_process: h dimension mismatch");
    const int d = model.dim();
    const int steps = step_count(T, dt);
    const StepCoefficients sc = make_step_coefficients(model, dt);

    CoupledBatch out;
    for (PathBatch* b : {&out.x, &out.y}) {
        b->count = count;
        b->steps = steps;
        b->dim = d;
        b->dt = dt;
        b->seed = seed;
        b->scheme = "exponential-euler";
        b->data.resize(static_cast<std::size_t>(count) * (steps + 1) * d);
    }

    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t p) {
        CounterRng rng(seed, p);
        PathState st;
        st.x = x;
        st.y = h;
        st.dw.resize(d);
        std::vector<double> b1(d), b2(d);
        double* xrow = out.x.data.data() + p * (steps + 1) * d;
        double* yrow = out.y.data.data() + p * (steps + 1) * d;
        for (int n = 0; n < d; ++n) {
            xrow[n] = x[n];
            yrow[n] = h[n];
        }
        for (int k = 0; k < steps; ++k) {
            advance(model, drift, sc, rng, k, dt, true, false, st, b1, b2);
            for (int n = 0; n < d; ++n) {
                xrow[(k + 1) * d + n] = st.x[n];
                yrow[(k + 1) * d + n] = st.y[n];
            }
        }
    });
    return out;
}

McEstimate bel_gradient(const DiagonalModel& model, const DriftSpec& drift,
                        double s, const ScalarField& phi,
                        const std::vector<double>& x, const std::vector<double>& h,
                        double dt, long count, std::uint64_t seed, int threads) {
    require(s > 0.0, "bel_gradient: s must be > 0");
    require(count >= 2, "bel_gradient: count must be >= 2");
    if (drift.sigma_diag) {
        require(drift.sigma_inverse_bound > 0.0,
                "bel_gradient: sigma inverse bound C_0 required");
    }
    for (double q : model.q())
        require(q > 0.0, "bel_gradient: sigma must be invertible");
    const int d = model.dim();
    const int steps = step_count(s, dt);
    require(steps >= 1, "bel_gradient: dt too large for horizon");
    const StepCoefficients sc = make_step_coefficients(model, dt);

    std::vector<double> samples(count);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t p) {
        CounterRng rng(seed, p);
        PathState st;
        st.x = x;
        st.y = h;
        st.dw.resize(d);
        std::vector<double> b1(d), b2(d);
        for (int k = 0; k < steps; ++k)
            advance(model, drift, sc, rng, k, dt, true, true, st, b1, b2);
        samples[p] = phi(st.x) * st.u_weight / s;
    });
    const double mean = pairwise_sum(samples) / count;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    McEstimate est;
    est.value = mean;
    est.stderr_ = std::sqrt(ss / (count - 1) / count);
    return est;
}

}  // namespace mildhjb

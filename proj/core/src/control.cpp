#include "mildhjb/control.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mildhjb/covariance.hpp"
#include "mildhjb/rng.hpp"

namespace mildhjb {

namespace {

bool uses_finite_grid(const ControlSet& c) { return !c.grid.empty(); }

double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

void ControlProblem::validate() const {
    require(model.dim() >= 1, "ControlProblem: empty model");
    require(lambda > 0.0, "ControlProblem: lambda must be > 0");
    require(static_cast<bool>(beta1), "ControlProblem: beta1 not set");
    require(ctrl.dim >= 1, "ControlProblem: control dimension must be >= 1");
    if (uses_finite_grid(ctrl)) {
        for (const auto& eta : ctrl.grid)
            require(static_cast<int>(eta.size()) == ctrl.dim,
                    "ControlProblem: control grid point dimension mismatch");
    } else {
        require(ctrl.rho > 0.0, "ControlProblem: ball radius must be > 0");
    }
    require(static_cast<int>(lcoef.size()) == ctrl.dim &&
                static_cast<int>(gl_coef.size()) == ctrl.dim,
            "ControlProblem: coefficient row count mismatch");
    for (int j = 0; j < ctrl.dim; ++j) {
        require(static_cast<int>(lcoef[j].size()) == model.dim() &&
                    static_cast<int>(gl_coef[j].size()) == model.dim(),
                "ControlProblem: coefficient column count mismatch");
        for (int n = 0; n < model.dim(); ++n) {
            const double expect = model.g()[n] * lcoef[j][n];
            require(std::abs(gl_coef[j][n] - expect) <=
                        1e-9 * (1.0 + std::abs(expect)),
                    "ControlProblem: gl_coef inconsistent with g * lcoef");
        }
    }
}

double ControlProblem::f0_lipschitz() const {
    if (uses_finite_grid(ctrl)) {
        // max over the control list of |L eta| (the z-slope of each affine
        // branch of the pointwise minimum).
        double best = 0.0;
        std::vector<double> row(model.dim());
        for (const auto& eta : ctrl.grid) {
            for (int n = 0; n < model.dim(); ++n) {
                row[n] = 0.0;
                for (int j = 0; j < ctrl.dim; ++j) row[n] += eta[j] * lcoef[j][n];
            }
            best = std::max(best, std::sqrt(sq_norm(row)));
        }
        return best;
    }
    Eigen::MatrixXd L(ctrl.dim, model.dim());
    for (int j = 0; j < ctrl.dim; ++j)
        for (int n = 0; n < model.dim(); ++n) L(j, n) = lcoef[j][n];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
    return ctrl.rho * svd.singularValues()(0);
}

void ControlProblem::gl_apply(std::span<const double> eta, std::span<double> out) const {
    for (int n = 0; n < model.dim(); ++n) {
        double s = 0.0;
        for (int j = 0; j < ctrl.dim; ++j) s += eta[j] * gl_coef[j][n];
        out[n] = s;
    }
}

HamiltonianValue hamiltonian_f0(const ControlProblem& problem,
                                std::span<const double> x,
                                std::span<const double> q) {
    HamiltonianValue out;
    const double base = problem.beta1(x);

    if (uses_finite_grid(problem.ctrl)) {
        // Exhaustive minimum; ties resolved by the smallest index.
        double best = 0.0;
        std::size_t best_j = 0;
        for (std::size_t jc = 0; jc < problem.ctrl.grid.size(); ++jc) {
            const auto& eta = problem.ctrl.grid[jc];
            double lin = 0.0;
            for (int j = 0; j < problem.ctrl.dim; ++j) {
                double wj = 0.0;
                for (int n = 0; n < problem.model.dim(); ++n)
                    wj += problem.lcoef[j][n] * q[n];
                lin += eta[j] * wj;
            }
            const double cand = lin + 0.5 * sq_norm(eta);
            if (jc == 0 || cand < best) {
                best = cand;
                best_j = jc;
            }
        }
        out.value = base + best;
        out.eta = problem.ctrl.grid[best_j];
        return out;
    }

    // Ball of radius rho, quadratic cost: minimize eta . w + |eta|^2 / 2 over
    // |eta| <= rho. Unconstrained minimizer -w, radially projected.
    std::vector<double> w(problem.ctrl.dim, 0.0);
    for (int j = 0; j < problem.ctrl.dim; ++j)
        for (int n = 0; n < problem.model.dim(); ++n)
            w[j] += problem.lcoef[j][n] * q[n];
    const double wn = std::sqrt(sq_norm(w));
    const double rho = problem.ctrl.rho;
    out.eta.resize(problem.ctrl.dim);
    if (wn <= rho) {
        for (int j = 0; j < problem.ctrl.dim; ++j) out.eta[j] = -w[j];
        out.value = base - 0.5 * wn * wn;
    } else {
        for (int j = 0; j < problem.ctrl.dim; ++j) out.eta[j] = -rho * w[j] / wn;
        out.value = base - rho * wn + 0.5 * rho * rho;
    }
    return out;
}

std::vector<double> neumann_map_coefficients(double delta, const std::vector<double>& eta,
                                             int N, int bvp_mesh) {
    require(delta > 0.0, "neumann_map_coefficients: delta must be > 0");
    require(eta.size() == 2, "neumann_map_coefficients: eta must be (eta_0, eta_pi)");
    require(N >= 1, "neumann_map_coefficients: N must be >= 1");
    require(bvp_mesh >= 16, "neumann_map_coefficients: mesh too coarse");
    const int M = bvp_mesh;
    const double h = std::numbers::pi / M;

    // w'' = delta w on (0, pi), outward normal data -w'(0) = eta_0,
    // w'(pi) = eta_pi. Second-order ghost-point closure at both ends;
    // Thomas solve of the resulting tridiagonal system.
    std::vector<double> diag(M + 1, 2.0 / (h * h) + delta);
    std::vector<double> off(M + 1, -1.0 / (h * h));  // sub/super are equal
    std::vector<double> rhs(M + 1, 0.0);
    std::vector<double> upper(M + 1);
    upper[0] = -2.0 / (h * h);
    for (int i = 1; i < M; ++i) upper[i] = off[i];
    std::vector<double> lower(M + 1);
    for (int i = 1; i < M; ++i) lower[i] = off[i];
    lower[M] = -2.0 / (h * h);
    rhs[0] = 2.0 * eta[0] / h;
    rhs[M] = 2.0 * eta[1] / h;

    std::vector<double> cp(M + 1), dp(M + 1);
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (int i = 1; i <= M; ++i) {
        const double denom = diag[i] - lower[i] * cp[i - 1];
        cp[i] = (i < M) ? upper[i] / denom : 0.0;
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom;
    }
    std::vector<double> w(M + 1);
    w[M] = dp[M];
    for (int i = M - 1; i >= 0; --i) w[i] = dp[i] - cp[i] * w[i + 1];

    // Project on the orthonormal Neumann cosine basis by composite trapezoid.
    const double norm0 = 1.0 / std::sqrt(std::numbers::pi);
    const double normn = std::sqrt(2.0 / std::numbers::pi);
    std::vector<double> coef(N);
    for (int n = 0; n < N; ++n) {
        std::vector<double> terms(M + 1);
        for (int i = 0; i <= M; ++i) {
            const double basis = (n == 0) ? norm0 : normn * std::cos(n * i * h);
            const double tw = (i == 0 || i == M) ? 0.5 : 1.0;
            terms[i] = tw * w[i] * basis;
        }
        coef[n] = h * pairwise_sum(terms);
    }
    return coef;
}

NeumannModel neumann_model(double delta, double eps, int N,
                           const std::vector<double>& noise_q, int bvp_mesh) {
    require(eps > 0.0 && eps < 0.25, "neumann_model: eps must lie in (0, 1/4)");
    require(N >= 1, "neumann_model: N must be >= 1");
    require(!noise_q.empty(), "neumann_model: noise_q must have 1 or N entries");
    const double beta_pow = 0.25 + eps;

    std::vector<double> alpha(N), q(N), g(N);
    for (int n = 0; n < N; ++n) {
        alpha[n] = static_cast<double>(n) * n;
        q[n] = (noise_q.size() == 1) ? noise_q[0] : noise_q.at(n);
        require(q[n] > 0.0, "neumann_model: noise intensities must be > 0");
        g[n] = std::pow(delta + alpha[n], beta_pow);
    }
    Rates rates;
    rates.alpha_p = 2.0;
    rates.alpha_c = 1.0;
    rates.q_p = 0.0;
    rates.q_c = q.back();
    rates.g_p = 0.5 + 2.0 * eps;
    rates.g_c = 1.0;

    NeumannModel nm{DiagonalModel(std::move(alpha), std::move(q), std::move(g), 2.0, rates),
                    {}, {}, delta, eps};
    nm.lcoef.assign(2, std::vector<double>(N));
    nm.gl_coef.assign(2, std::vector<double>(N));
    for (int j = 0; j < 2; ++j) {
        const std::vector<double> eta = (j == 0) ? std::vector<double>{1.0, 0.0}
                                                 : std::vector<double>{0.0, 1.0};
        const auto coef = neumann_map_coefficients(delta, eta, N, bvp_mesh);
        for (int n = 0; n < N; ++n) {
            const double dn = delta + static_cast<double>(n) * n;
            nm.lcoef[j][n] = std::pow(dn, 0.75 - eps) * coef[n];
            nm.gl_coef[j][n] = nm.model.g()[n] * nm.lcoef[j][n];
        }
    }
    return nm;
}

NeumannEstimateReport neumann_estimate_check(double delta, double eps, int N,
                                             const std::vector<double>& t_grid,
                                             double c0_scale) {
    require(delta >= 0.0, "neumann_estimate_check: delta must be >= 0");
    require(eps > 0.0 && eps < 0.25, "neumann_estimate_check: eps must lie in (0, 1/4)");
    require(N >= 1 && !t_grid.empty(), "neumann_estimate_check: empty input");
    const double beta_pow = 0.25 + eps;

    NeumannEstimateReport rep;
    // C_0 = 2 (1+delta)^{2 beta} sup_{s>0} s^{1+2 beta} / (e^{2s} - 1).
    double sup = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double s = std::exp(std::log(1e-4) +
                                  (std::log(30.0) - std::log(1e-4)) * i / 200000.0);
        sup = std::max(sup, std::pow(s, 1.0 + 2.0 * beta_pow) / std::expm1(2.0 * s));
    }
    rep.c0 = c0_scale * 2.0 * std::pow(1.0 + delta, 2.0 * beta_pow) * sup;

    for (double t : t_grid) {
        require(t > 0.0, "neumann_estimate_check: t must be > 0");
        double best_log = -std::numeric_limits<double>::infinity();
        for (int n = 1; n <= N; ++n) {
            const double n2 = static_cast<double>(n) * n;
            const double x = 2.0 * t * n2;
            const double log_denom = (x > 30.0) ? x : std::log(std::expm1(x));
            best_log = std::max(best_log, std::log(2.0 * n2) +
                                              2.0 * beta_pow * std::log(delta + n2) -
                                              log_denom);
        }
        const double lhs = std::exp(best_log);
        const double rhs = rep.c0 / std::pow(t, 1.0 + 2.0 * beta_pow);
        rep.t_grid.push_back(t);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
    }
    rep.pass = rep.worst_ratio <= 1.0 + 1e-12;
    return rep;
}

namespace {

// Moment-growth constant fit: kappa = sup over probes of
// E[1 + |e^{tA}x + y|^m] / ((1 + |x|^m) e^{a t}) with y ~ N(0, Q_t).
double fit_growth_kappa(const DiagonalModel& model, double a, double xmax,
                        const QuadratureRule& rule) {
    const double m = model.m();
    if (m <= 0.0) return 1.0;
    const int d = model.dim();
    const auto moment = [m](std::span<const double> y) {
        double r = 0.0;
        for (double v : y) r += v * v;
        return 1.0 + std::pow(std::sqrt(r), m);
    };
    std::vector<std::vector<double>> probes = {std::vector<double>(d, 0.0),
                                               std::vector<double>(d, xmax),
                                               std::vector<double>(d, -xmax),
                                               std::vector<double>(d, 0.5 * xmax)};
    double kappa = 1.0;
    for (double t : {0.05, 0.2, 1.0, 2.0, 5.0}) {
        const DiagCovariance cov = qt_diagonal(model, t);
        for (const auto& x : probes) {
            const double num = expectation(cov, model.apply_semigroup_matrix(t, x),
                                           moment, rule);
            double r = 0.0;
            for (double v : x) r += v * v;
            const double den =
                (1.0 + std::pow(std::sqrt(r), m)) * std::exp(a * t);
            kappa = std::max(kappa, num / den);
        }
    }
    return kappa;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    return out;
}

}  // namespace

HjbResult solve_hjb(const ControlProblem& problem, const HjbConfig& cfg) {
    problem.validate();
    cfg.grid.validate();
    require(cfg.grid.dim() == problem.model.dim(),
            "solve_hjb: grid dimension mismatch");

    const double L = problem.f0_lipschitz();
    const double omega = problem.model.omega();
    const double m = problem.model.m();
    double a = 0.0;
    if (omega > 1e-12)
        a = m * omega;
    else if (omega >= -1e-12 && m > 0.0)
        a = 1.0;  // absorbs the polynomial moment growth of the critical case
    double xmax = 0.0;
    for (int n = 0; n < cfg.grid.dim(); ++n)
        xmax = std::max(xmax, std::max(std::abs(cfg.grid.lo[n]), std::abs(cfg.grid.hi[n])));
    const double kappa = fit_growth_kappa(problem.model, a, xmax, cfg.rule);

    CertificateReport cert = certify(problem.model, L, kappa, a, logspace(1e-3, 10.0, 25));
    require(cert.all_passed(), "solve_hjb: model assumption checks failed");
    require(problem.lambda > cert.lambda0,
            "solve_hjb: lambda must exceed the contraction threshold lambda_0");
    const double alpha_lambda = contraction_constant(L, kappa, a, a, cert.envelope,
                                                     problem.lambda);

    const TimeQuadrature tq =
        TimeQuadrature::build(problem.lambda, a, a, cert.envelope, cfg.tol);

    double rho_eff = problem.ctrl.rho;
    if (uses_finite_grid(problem.ctrl)) {
        rho_eff = 0.0;
        for (const auto& eta : problem.ctrl.grid)
            rho_eff = std::max(rho_eff, std::sqrt(sq_norm(eta)));
    }
    HamiltonianSpec F0;
    F0.f0 = [&problem](std::span<const double> x, double, std::span<const double> z) {
        return hamiltonian_f0(problem, x, z).value;
    };
    F0.lipschitz = L;
    F0.growth_const = problem.beta1_weighted_sup + L + 0.5 * rho_eff * rho_eff;
    F0.m = m;

    PicardConfig pc;
    pc.lambda = problem.lambda;
    pc.grid = cfg.grid;
    pc.tol = cfg.tol;
    pc.max_iter = cfg.max_iter;
    pc.threads = cfg.threads;
    pc.alpha_lambda = alpha_lambda;
    pc.lambda0 = cert.lambda0;

    PicardResult res = solve_picard(problem.model, F0, pc, tq, cfg.rule);
    return HjbResult{std::move(res.u), std::move(res.v), std::move(res.report),
                     std::move(cert)};
}

Policy feedback_policy(const ControlProblem& problem, const GridField& v) {
    require(v.components() == problem.model.dim(),
            "feedback_policy: v component count mismatch");
    return [problem, v](std::span<const double> x) {
        std::vector<double> z(v.components());
        v.eval_all(x, z);
        return hamiltonian_f0(problem, x, z).eta;
    };
}

PolicyValue evaluate_policy(const ControlProblem& problem, const Policy& policy,
                            const std::vector<double>& x, double T, double dt,
                            long count, std::uint64_t seed, int threads) {
    problem.validate();
    require(dt > 0.0 && T >= dt, "evaluate_policy: need 0 < dt <= T");
    require(count >= 2, "evaluate_policy: count must be >= 2");
    require(static_cast<int>(x.size()) == problem.model.dim(),
            "evaluate_policy: dimension mismatch");
    const DiagonalModel& model = problem.model;
    const int d = model.dim();
    const int steps = static_cast<int>(std::llround(T / dt));
    const double lambda = problem.lambda;

    // Exponential Euler step coefficients with the exact convolution noise.
    std::vector<double> decay(d), phi(d), corr(d), resid(d);
    const DiagCovariance qdt = qt_diagonal(model, dt);
    for (int n = 0; n < d; ++n) {
        const double al = model.alpha()[n];
        decay[n] = std::exp(-al * dt);
        phi[n] = dt * expm1_ratio(al * dt);
        const double cov = std::sqrt(model.q()[n]) * phi[n];
        corr[n] = cov / dt;
        resid[n] = std::sqrt(std::max(0.0, qdt.lambda[n] - cov * cov / dt));
    }
    const double sqrt_dt = std::sqrt(dt);
    const double disc_step = std::exp(-lambda * dt);

    std::vector<double> samples(count), tails(count);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t p) {
        CounterRng rng(seed, p);
        std::vector<double> st = x, drift(d);
        double cost = 0.0, disc = 1.0;
        for (int k = 0; k < steps; ++k) {
            const std::vector<double> eta = policy(st);
            cost += disc * (problem.beta1(st) + 0.5 * sq_norm(eta)) * dt;
            problem.gl_apply(eta, drift);
            const std::uint64_t base = static_cast<std::uint64_t>(k) * 2 * d;
            for (int n = 0; n < d; ++n) {
                const double dw = sqrt_dt * rng.normal(base + 2 * n);
                const double noise = corr[n] * dw + resid[n] * rng.normal(base + 2 * n + 1);
                st[n] = decay[n] * st[n] + phi[n] * drift[n] + noise;
            }
            disc *= disc_step;
        }
        samples[p] = cost;
        const std::vector<double> eta = policy(st);
        tails[p] = disc * (problem.beta1(st) + 0.5 * sq_norm(eta)) / lambda;
    });

    PolicyValue out;
    out.value = pairwise_sum(samples) / count;
    double ss = 0.0;
    for (double v : samples) ss += (v - out.value) * (v - out.value);
    out.stderr_ = std::sqrt(ss / (count - 1) / count);
    out.tail_bound = pairwise_sum(tails) / count;
    return out;
}

GridField dp_oracle(const ControlProblem& problem, const DpOracleConfig& cfg) {
    problem.validate();
    const DiagonalModel& model = problem.model;
    const int d = model.dim();
    require(d <= 2, "dp_oracle: supports truncation dimension <= 2 only");
    require(cfg.state_nodes >= 3, "dp_oracle: need at least 3 state nodes per axis");
    require(cfg.dt > 0.0, "dp_oracle: dt must be > 0");

    const GridSpec grid = GridSpec::symmetric(d, cfg.xmax, cfg.state_nodes);
    const double h = 2.0 * cfg.xmax / (cfg.state_nodes - 1);
    const std::size_t total = grid.total_nodes();

    // Control candidates: explicit list, or a mesh of the ball.
    std::vector<std::vector<double>> controls;
    if (uses_finite_grid(problem.ctrl)) {
        controls = problem.ctrl.grid;
    } else {
        const double rho = problem.ctrl.rho;
        const int nc = std::max(2, cfg.control_nodes);
        std::vector<int> idx(problem.ctrl.dim, 0);
        while (true) {
            std::vector<double> eta(problem.ctrl.dim);
            for (int j = 0; j < problem.ctrl.dim; ++j)
                eta[j] = -rho + 2.0 * rho * idx[j] / (nc - 1);
            if (sq_norm(eta) <= rho * rho * (1.0 + 1e-12)) controls.push_back(eta);
            int j = problem.ctrl.dim - 1;
            while (j >= 0 && ++idx[j] == nc) idx[j--] = 0;
            if (j < 0) break;
        }
    }
    const std::size_t nctrl = controls.size();
    require(nctrl >= 1, "dp_oracle: empty control mesh");

    std::vector<std::vector<double>> gl(nctrl, std::vector<double>(d));
    std::vector<double> ctrl_cost(nctrl);
    for (std::size_t c = 0; c < nctrl; ++c) {
        problem.gl_apply(controls[c], gl[c]);
        ctrl_cost[c] = 0.5 * sq_norm(controls[c]);
    }

    // Upwind transition probabilities per (state, control, axis), with the
    // CFL check of the explicit Markov chain approximation.
    std::vector<std::size_t> strides(d, 1);
    for (int a = d - 2; a >= 0; --a)
        strides[a] = strides[a + 1] * static_cast<std::size_t>(grid.nodes[a + 1]);

    std::vector<double> p_plus(total * nctrl * d), p_minus(total * nctrl * d);
    std::vector<double> stage(total * nctrl);
    double worst_outflow = 0.0;
    std::vector<int> mi(d);
    std::vector<double> xc(d);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        for (int a = 0; a < d; ++a) {
            mi[a] = static_cast<int>(rem / strides[a]);
            rem %= strides[a];
            xc[a] = grid.coord(a, mi[a]);
        }
        const double base_cost = problem.beta1(xc);
        for (std::size_t c = 0; c < nctrl; ++c) {
            stage[i * nctrl + c] = (base_cost + ctrl_cost[c]) * cfg.dt;
            double outflow = 0.0;
            for (int a = 0; a < d; ++a) {
                const double drift = -model.alpha()[a] * xc[a] + gl[c][a];
                const double pp =
                    cfg.dt * (0.5 * model.q()[a] + h * std::max(drift, 0.0)) / (h * h);
                const double pm =
                    cfg.dt * (0.5 * model.q()[a] + h * std::max(-drift, 0.0)) / (h * h);
                p_plus[(i * nctrl + c) * d + a] = pp;
                p_minus[(i * nctrl + c) * d + a] = pm;
                outflow += pp + pm;
            }
            worst_outflow = std::max(worst_outflow, outflow);
        }
    }
    if (worst_outflow > 1.0) {
        throw invalid_input("dp_oracle: CFL condition violated; use dt <= " +
                            std::to_string(cfg.dt / worst_outflow));
    }

    const double disc = std::exp(-problem.lambda * cfg.dt);
    std::vector<double> V(total, 0.0), Vn(total);
    const int max_sweeps = 5000000;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double delta = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            std::size_t rem = i;
            for (int a = 0; a < d; ++a) {
                mi[a] = static_cast<int>(rem / strides[a]);
                rem %= strides[a];
            }
            double best = 0.0;
            for (std::size_t c = 0; c < nctrl; ++c) {
                double flow = 0.0, p_stay = 1.0;
                for (int a = 0; a < d; ++a) {
                    const double pp = p_plus[(i * nctrl + c) * d + a];
                    const double pm = p_minus[(i * nctrl + c) * d + a];
                    // reflecting closure: out-of-box moves stay in place
                    const std::size_t up =
                        (mi[a] + 1 < grid.nodes[a]) ? i + strides[a] : i;
                    const std::size_t dn = (mi[a] > 0) ? i - strides[a] : i;
                    flow += pp * V[up] + pm * V[dn];
                    p_stay -= pp + pm;
                }
                const double cand = stage[i * nctrl + c] + disc * (flow + p_stay * V[i]);
                if (c == 0 || cand < best) best = cand;
            }
            Vn[i] = best;
            delta = std::max(delta, std::abs(best - V[i]));
        }
        V.swap(Vn);
        if (delta <= 1e-8) {
            converged = true;
            break;
        }
    }
    require(converged, "dp_oracle: value iteration did not converge");
    return GridField(grid, 1, model.m(), std::move(V));
}

}  // namespace mildhjb

// Acceptance harness: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "mildhjb/certificates.hpp"
#include "mildhjb/control.hpp"
#include "mildhjb/covariance.hpp"
#include "mildhjb/mild_solver.hpp"
#include "mildhjb/rng.hpp"
#include "mildhjb/sde.hpp"
#include "mildhjb/semigroup.hpp"
#include "mildhjb/time_quadrature.hpp"

using namespace mildhjb;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    return out;
}

DiagonalModel model1(double alpha, double q, double g = 1.0, double m = 0.0) {
    return DiagonalModel({alpha}, {q}, {g}, m);
}

double simpson_qt(double alpha, double q, double t, int n = 4000) {
    const double h = t / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * q * std::exp(-2.0 * alpha * i * h);
    }
    return s * h / 3.0;
}

// --- criterion bodies ---------------------------------------------------

bool covariance_accuracy() {
    const auto t0 = Clock::now();
    CounterRng rng(1, 0);
    std::uint64_t c = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double alpha = 4.0 * rng.uniform(c++);
        const double q = 0.1 + 3.0 * rng.uniform(c++);
        const double t = 0.01 + 5.0 * rng.uniform(c++);
        const double closed = qt_diagonal(model1(alpha, q), t).lambda[0];
        if (std::abs(closed - simpson_qt(alpha, q, t)) > 1e-10 * closed) return false;
    }
    return seconds_since(t0) < 1.0;
}

bool trace_bound() {
    CounterRng rng(2, 0);
    std::uint64_t c = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> alpha(4), q(4), g(4, 1.0);
        for (int n = 0; n < 4; ++n) {
            alpha[n] = 3.0 * rng.uniform(c++);
            q[n] = 0.1 + 2.0 * rng.uniform(c++);
        }
        const DiagonalModel model(alpha, q, g, 2.0);
        for (double t : {0.1, 0.5, 1.0, 1.7, 3.0, 5.5, 9.3, 10.0})
            if (trace_qt(model, t) > trace_qt_bound(model, t) * (1.0 + 1e-12))
                return false;
    }
    return true;
}

bool semigroup_exactness() {
    const DiagonalModel model = model1(1.0, 1.0);
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(32);
    const ScalarField sine = [](std::span<const double> y) { return std::sin(y[0]); };
    for (double t : {0.1, 0.5, 2.0})
        for (double x : {-1.5, 0.0, 0.8}) {
            const double got = apply_semigroup(model, t, sine, {x}, rule);
            if (std::abs(got - ou1d_sin_semigroup(model, t, x)) > 1e-10) return false;
        }
    // independent Monte Carlo route via the exact mild simulator
    const auto est =
        mc_semigroup(model, DriftSpec::zero(1), 0.7, sine, {0.8}, 0.05, 100000, 3, 2);
    return std::abs(est.value - ou1d_sin_semigroup(model, 0.7, 0.8)) <=
           3.0 * est.stderr_;
}

bool g_derivative_routes() {
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(32);
    const double t = 0.5;
    for (int d : {1, 2}) {
        std::vector<double> alpha(d), q(d), g(d);
        for (int n = 0; n < d; ++n) {
            alpha[n] = 0.5 + 0.7 * n;
            q[n] = 1.0 - 0.3 * n;
            g[n] = 1.0 + 0.5 * n;
        }
        const DiagonalModel model(alpha, q, g, 0.0);
        const ScalarField phi = [](std::span<const double> y) {
            double s = 0.0;
            for (double v : y) s += v;
            return std::sin(s);
        };
        std::vector<double> x(d, 0.4);
        const auto grad = g_gradient_semigroup(model, t, phi, x, rule);
        for (int n = 0; n < d; ++n) {
            // finite-difference route
            const double h = 1e-5;
            std::vector<double> xp = x, xm = x;
            xp[n] += h;
            xm[n] -= h;
            const double fd = g[n] *
                              (apply_semigroup(model, t, phi, xp, rule) -
                               apply_semigroup(model, t, phi, xm, rule)) /
                              (2.0 * h);
            if (std::abs(fd - grad[n]) > 1e-4) return false;
            // C^1 route: E<D phi, e^{tA} G e_n>
            const ScalarField dphi = [](std::span<const double> y) {
                double s = 0.0;
                for (double v : y) s += v;
                return std::cos(s);
            };
            const double c1 = apply_semigroup(model, t, dphi, x, rule) *
                              std::exp(-t * alpha[n]) * g[n];
            if (std::abs(c1 - grad[n]) > 1e-6) return false;
        }
    }
    // tight m = 0 smoothing bound
    const auto rep = smoothing_estimate_check(
        model1(1.0, 1.0), 0.3,
        [](std::span<const double> y) { return std::sin(y[0]); }, 1.0, {0.5}, rule);
    return rep.pass;
}

bool cameron_martin_identity() {
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(32);
    CounterRng rng(4, 0);
    std::uint64_t c = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + (trial % 2);
        std::vector<double> alpha(d), q(d), g(d), x(d), k(d);
        for (int n = 0; n < d; ++n) {
            alpha[n] = 2.0 * rng.uniform(c++);
            q[n] = 0.3 + 1.5 * rng.uniform(c++);
            g[n] = 0.5 + rng.uniform(c++);
            x[n] = 2.0 * rng.uniform(c++) - 1.0;
            k[n] = 2.0 * rng.uniform(c++) - 1.0;
        }
        const DiagonalModel model(alpha, q, g, 0.0);
        const double t = 0.2 + 1.5 * rng.uniform(c++);
        const double s = 0.6 * rng.uniform(c++);
        const ScalarField phi = [](std::span<const double> y) {
            double r = 0.0;
            for (double v : y) r += v;
            return std::sin(r) + 0.3 * std::cos(2.0 * r);
        };
        std::vector<double> xs = x;
        for (int n = 0; n < d; ++n) xs[n] += s * g[n] * k[n];
        const double lhs = apply_semigroup(model, t, phi, xs, rule);

        const auto cov = qt_diagonal(model, t);
        const auto shift = model.apply_semigroup_matrix(t, x);
        const double rhs = expectation(
            cov, shift,
            [&](std::span<const double> ysh) {
                std::vector<double> y(d);
                for (int n = 0; n < d; ++n) y[n] = ysh[n] - shift[n];
                return phi(ysh) * cameron_martin_density(model, t, k, s, y);
            },
            rule);
        if (std::abs(lhs - rhs) > 1e-8) return false;
    }
    return true;
}

bool envelope_recovery() {
    const auto t0 = Clock::now();
    const auto t_grid = logspace(1e-4, 10.0, 40);
    const int N = 400;
    std::vector<double> alpha(N), q(N), g2(N), g3(N);
    for (int n = 0; n < N; ++n) {
        alpha[n] = double(n + 1) * (n + 1);
        q[n] = 1.0 / (n + 1);
        g2[n] = std::sqrt(q[n]);
        g3[n] = std::pow(alpha[n], 0.2) * std::pow(std::pow(n + 1.0, -1.5), 0.5);
    }
    const auto case2 =
        gamma_envelope(DiagonalModel(alpha, q, g2, 0.0), t_grid);
    if (std::abs(case2.theta - 0.5) > 0.02 || !case2.integrable) return false;
    std::vector<double> q3(N);
    for (int n = 0; n < N; ++n) q3[n] = std::pow(n + 1.0, -1.5);
    const auto case3 =
        gamma_envelope(DiagonalModel(alpha, q3, g3, 0.0), t_grid);
    if (std::abs(case3.theta - 0.7) > 0.02 || !case3.integrable) return false;

    for (double eps : {0.05, 0.1, 0.2}) {
        const auto rep = neumann_estimate_check(1.0, eps, 10000, t_grid);
        if (!rep.pass) return false;
    }
    return seconds_since(t0) < 10.0;
}

bool contraction_machinery() {
    EnvelopeFit env;
    env.c = 1.0;
    env.theta = 0.5;
    for (double lam : {1.3, 2.0, 4.9, 11.0})
        if (std::abs(contraction_constant(0.7, 1.3, 0.2, 0.1, env, lam) -
                     contraction_constant_quadrature(0.7, 1.3, 0.2, 0.1, env, lam)) >
            1e-8)
            return false;
    if (std::abs(lambda_threshold(1.0, 1.0, 0.0, 0.0, env) - 4.9394) > 1e-3)
        return false;

    // Picard contraction ratios on five distinct Hamiltonians
    const DiagonalModel model = model1(1.0, 1.0);
    const double lambda = 8.0;
    const double alpha_l = contraction_constant(1.0, 1.0, 0.0, 0.0, env, lambda);
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(24);
    using F = std::function<double(double, double)>;
    const std::vector<F> bodies = {
        [](double y, double z) { return std::sin(y) + 0.5 * std::tanh(z); },
        [](double y, double z) { return std::cos(y) + 0.3 * std::sin(z); },
        [](double y, double z) { return 0.5 * (std::sin(y) + std::sin(z)); },
        [](double y, double z) { return 0.6 * std::tanh(y) + 0.4 * std::sin(z); },
        [](double y, double z) { return 0.8 * std::cos(y) + 0.2 * std::sin(2.0 * z); }};
    for (const auto& body : bodies) {
        HamiltonianSpec F0;
        F0.f0 = [&body](std::span<const double>, double y, std::span<const double> z) {
            return body(y, z[0]);
        };
        F0.lipschitz = 1.0;
        F0.growth_const = 2.0;
        F0.m = 0.0;
        PicardConfig cfg;
        cfg.lambda = lambda;
        cfg.grid = GridSpec::symmetric(1, 2.0, 11);
        cfg.tol = 1e-8;
        cfg.max_iter = 60;
        cfg.alpha_lambda = alpha_l;
        const auto res = solve_picard(model, F0, cfg, tq, rule);
        if (!res.report.converged) return false;
        for (std::size_t i = 2; i < res.report.contraction_ratios.size(); ++i)
            if (res.report.contraction_ratios[i] > alpha_l + 0.05) return false;
    }
    return true;
}

bool resolvent_closed_form() {
    const DiagonalModel model({1.0, 0.5}, {1.0, 0.7}, {1.0, 1.0}, 1.0);
    const double lambda = 2.0;
    EnvelopeFit env;
    env.c = 1.0;
    env.theta = 0.5;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);
    const std::vector<double> c = {1.0, -0.6};
    HamiltonianSpec lin;
    lin.f0 = [c](std::span<const double> x, double, std::span<const double>) {
        return c[0] * x[0] + c[1] * x[1];
    };
    lin.lipschitz = 0.0;
    lin.growth_const = 2.0;
    lin.m = 1.0;
    PicardConfig cfg;
    cfg.lambda = lambda;
    cfg.grid = GridSpec::symmetric(2, 2.0, 9);
    cfg.tol = 1e-7;
    const auto res =
        solve_picard(model, lin, cfg, tq, QuadratureRule::gauss_hermite_rule(24));
    if (!res.report.converged) return false;
    for (std::size_t i = 0; i < cfg.grid.total_nodes(); ++i) {
        const auto x = res.u.node_coords(i);
        const double exact = c[0] * x[0] / (lambda + model.alpha()[0]) +
                             c[1] * x[1] / (lambda + model.alpha()[1]);
        if (std::abs(res.u.value_at_node(i, 0) - exact) > 1e-4) return false;
    }
    return true;
}

bool residual_and_uniqueness() {
    const DiagonalModel model = model1(1.0, 1.0);
    const double lambda = 8.0;
    EnvelopeFit env;
    env.c = 1.0;
    env.theta = 0.5;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(24);
    HamiltonianSpec F0;
    F0.f0 = [](std::span<const double>, double y, std::span<const double> z) {
        return std::cos(y) + 0.3 * std::sin(z[0]);
    };
    F0.lipschitz = 1.0;
    F0.growth_const = 1.3;
    F0.m = 0.0;
    PicardConfig cfg;
    cfg.lambda = lambda;
    cfg.grid = GridSpec::symmetric(1, 2.0, 11);
    cfg.tol = 1e-8;
    cfg.max_iter = 60;
    cfg.alpha_lambda = contraction_constant(1.0, 1.0, 0.0, 0.0, env, lambda);
    const auto res = solve_picard(model, F0, cfg, tq, rule);
    if (!res.report.converged) return false;
    const double r =
        residual_check(model, F0, lambda, res.u, res.v, tq, rule);
    if (r > 2.0 * cfg.tol + 1e-6) return false;

    GridField u2 = GridField::sample_scalar(cfg.grid, 0.0, [](std::span<const double> x) {
        return std::sin(3.0 * x[0]) + 0.5;
    });
    GridField v2 = GridField::sample_scalar(cfg.grid, 0.0, [](std::span<const double> x) {
        return std::cos(2.0 * x[0]);
    });
    for (int it = 0; it < 30; ++it) {
        GridField nu = upsilon1(model, F0, u2, v2, lambda, tq, rule);
        GridField nv = upsilon2(model, F0, u2, v2, lambda, tq, rule);
        u2 = std::move(nu);
        v2 = std::move(nv);
    }
    return g_pair_norm(u2 - res.u, v2 - res.v) <= 2.0 * cfg.tol + 1e-6;
}

bool bel_estimator() {
    const auto t0 = Clock::now();
    const DiagonalModel model = model1(1.0, 1.0);
    const std::vector<double> x = {0.8}, h = {1.0};
    const ScalarField sine = [](std::span<const double> y) { return std::sin(y[0]); };
    const double s = 0.5;
    const double exact = std::exp(-qt_diagonal(model, s).lambda[0] / 2.0) *
                         std::exp(-s) * std::cos(std::exp(-s) * x[0]);
    const auto est = bel_gradient(model, DriftSpec::zero(1), s, sine, x, h, s / 100.0,
                                  100000, 13, 2);
    if (std::abs(est.value - exact) > 3.0 * est.stderr_ + 2e-3) return false;

    std::vector<double> ls, lse;
    for (double sv : {0.01, 0.0316, 0.1, 0.316, 1.0}) {
        const auto e = bel_gradient(model, DriftSpec::zero(1), sv, sine, x, h,
                                    sv / 50.0, 20000, 17, 2);
        ls.push_back(std::log(sv));
        lse.push_back(std::log(e.stderr_));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        mx += ls[i];
        my += lse[i];
    }
    mx /= ls.size();
    my /= ls.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        num += (ls[i] - mx) * (lse[i] - my);
        den += (ls[i] - mx) * (ls[i] - mx);
    }
    if (std::abs(num / den + 0.5) > 0.2) return false;
    return seconds_since(t0) < 60.0;
}

bool sde_moment_growth() {
    const DiagonalModel model({0.5, 1.5}, {1.0, 0.5}, {1.0, 1.0}, 2.0);
    const std::vector<double> x = {1.0, -1.0};
    DriftSpec drift;
    drift.b = [](std::span<const double> xx, std::span<double> out) {
        for (std::size_t n = 0; n < xx.size(); ++n) out[n] = 0.3 * std::tanh(xx[n]);
    };
    drift.lipschitz = 0.3;
    const long count = 20000;
    const auto mean_moment = [&](double t, std::uint64_t seed) {
        const auto b = simulate_mild(model, drift, x, t, 0.02, count, seed, 2);
        double acc = 0.0;
        for (long p = 0; p < count; ++p) {
            double r = 0.0;
            for (int n = 0; n < 2; ++n) r += b.at(p, b.steps, n) * b.at(p, b.steps, n);
            acc += 1.0 + r;
        }
        return acc / count;
    };
    const double base = 1.0 + 2.0;
    double kappa = 1.0;
    for (double t : {0.25, 1.0, 3.0}) kappa = std::max(kappa, mean_moment(t, 101) / base);
    for (double t : {0.1, 0.5, 2.0, 4.0})
        if (mean_moment(t, 202) > 1.05 * kappa * base) return false;
    return true;
}

bool neumann_demo() {
    const auto t0 = Clock::now();
    const NeumannModel nm = neumann_model(1.0, 0.1, 1, {1.0});
    ControlProblem problem{nm.model, {}, nm.lcoef, nm.gl_coef, nullptr};
    problem.ctrl.rho = 1.0;
    problem.ctrl.dim = 2;
    problem.beta1 = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    problem.beta1_weighted_sup = 1.0;
    problem.lambda = 6.0;

    HjbConfig hc;
    hc.grid = GridSpec::symmetric(1, 2.0, 11);
    hc.rule = QuadratureRule::gauss_hermite_rule(24);
    hc.tol = 1e-4;
    const HjbResult res = solve_hjb(problem, hc);
    if (!res.report.converged || !res.certificate.all_passed()) return false;

    DpOracleConfig dpc;
    dpc.xmax = 3.0;
    dpc.state_nodes = 301;
    dpc.control_nodes = 9;
    dpc.dt = 2e-4;
    const GridField dp = dp_oracle(problem, dpc);
    for (double xv : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const std::vector<double> pt = {xv};
        const double rel = std::abs(res.u.eval(pt) - dp.eval(pt)) /
                           std::max(1.0, std::abs(dp.eval(pt)));
        if (rel > 5e-2) return false;
    }

    const Policy policy = feedback_policy(problem, res.v);
    const std::vector<double> x0 = {0.5};
    const auto rollout = evaluate_policy(problem, policy, x0, 2.5, 1e-2, 4000, 19, 2);
    const double total = rollout.value + rollout.tail_bound;
    if (std::abs(total - res.u.eval(x0)) > 3.0 * rollout.stderr_ + 0.05) return false;
    return seconds_since(t0) < 600.0;
}

bool sup_norm_gap() {
    const DiagonalModel model = model1(1.0, 1.0);
    const double s = 1.0;
    const double envelope = std::exp(-qt_diagonal(model, s).lambda[0] / 2.0);
    // growing windows: the gap does not vanish as t -> s
    const double g2 = sup_gap_demo(model, 1.001, s, 1e2);
    const double g4 = sup_gap_demo(model, 1.001, s, 1e4);
    if (g4 < 0.4 * envelope) return false;
    if (g4 < g2 * (1.0 - 1e-9)) return false;
    // fixed window: pointwise-on-compacts continuity
    return sup_gap_demo(model, 1.0 + 1e-6, s, 2.0) <= 1e-3;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)();
    };
    const std::vector<Criterion> criteria = {
        {"covariance closed form matches quadrature (100 pairs, 1e-10, <1s)",
         covariance_accuracy},
        {"trace of Q_t obeys the integer-step bound (50 random models)", trace_bound},
        {"semigroup exactness: Gauss-Hermite 1e-10 and Monte Carlo 3-sigma",
         semigroup_exactness},
        {"G-derivative: finite differences 1e-4, C1 route 1e-6, m=0 bound",
         g_derivative_routes},
        {"Cameron-Martin reweighting identity (20 configs, 1e-8)",
         cameron_martin_identity},
        {"gamma envelope exponents recovered; boundary-control estimate (<10s)",
         envelope_recovery},
        {"contraction constant, threshold, Picard ratios on 5 Hamiltonians",
         contraction_machinery},
        {"linear resolvent closed form (d=2, 1e-4)", resolvent_closed_form},
        {"fixed-point residual and uniqueness within 2x tolerance",
         residual_and_uniqueness},
        {"BEL gradient: 3-sigma accuracy and s^{-1/2} variance scaling (<60s)",
         bel_estimator},
        {"SDE moment growth constant transfers across seeds", sde_moment_growth},
        {"boundary-control demo: solver vs DP oracle and policy rollout (<10min)",
         neumann_demo},
        {"sup-norm semigroup gap persists on growing windows", sup_norm_gap}};

    int failures = 0;
    for (const auto& c : criteria) {
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            std::printf("FAIL: %s (exception: %s)\n", c.name, e.what());
            ++failures;
            continue;
        }
        std::printf("%s: %s\n", ok ? "PASS" : "FAIL", c.name);
        if (!ok) ++failures;
    }
    std::printf("%d/%zu criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

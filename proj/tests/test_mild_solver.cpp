#include <cmath>

#include "doctest.h"
#include "mildhjb/certificates.hpp"
#include "mildhjb/mild_solver.hpp"
#include "mildhjb/rng.hpp"
#include "mildhjb/time_quadrature.hpp"

using namespace mildhjb;

namespace {

const QuadratureRule kRule = QuadratureRule::gauss_hermite_rule(24);

EnvelopeFit unit_envelope(double c = 1.0, double theta = 0.5) {
    EnvelopeFit env;
    env.c = c;
    env.theta = theta;
    env.power_law_ok = true;
    env.integrable = true;
    env.bounded_at_inf = true;
    return env;
}

HamiltonianSpec constant_f0(double c) {
    HamiltonianSpec F0;
    F0.f0 = [c](std::span<const double>, double, std::span<const double>) { return c; };
    F0.lipschitz = 0.0;
    F0.growth_const = std::abs(c);
    F0.m = 0.0;
    return F0;
}

GridField zero_field(const GridSpec& spec, int comps, double m) {
    return GridField(spec, comps, m, std::vector<double>(spec.total_nodes() * comps, 0.0));
}

}  // namespace

TEST_CASE("HamiltonianSpec sampled validation") {
    HamiltonianSpec good;
    good.f0 = [](std::span<const double> x, double y, std::span<const double> z) {
        return std::sin(y) + 0.5 * std::tanh(z[0]) + x[0];
    };
    good.lipschitz = 1.5;
    good.growth_const = 2.0;
    good.m = 1.0;
    CHECK_NOTHROW(good.validate(1, 2.0, 200, 11));

    HamiltonianSpec bad = good;
    bad.lipschitz = 0.2;  // actual joint slope is up to 1.5
    CHECK_THROWS_AS(bad.validate(1, 2.0, 200, 11), invalid_input);
}

TEST_CASE("upsilon1: constant and linear closed forms, linearity") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 1.0);
    const double lambda = 2.0;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, unit_envelope(), 1e-8);
    const GridSpec spec = GridSpec::symmetric(1, 2.0, 9);
    const GridField u = zero_field(spec, 1, 1.0);
    const GridField v = zero_field(spec, 1, 1.0);

    const GridField uc = upsilon1(model, constant_f0(3.0), u, v, lambda, tq, kRule);
    for (std::size_t i = 0; i < spec.total_nodes(); ++i)
        CHECK(uc.value_at_node(i, 0) == doctest::Approx(1.5).epsilon(1e-6));

    HamiltonianSpec lin;
    lin.f0 = [](std::span<const double> x, double, std::span<const double>) {
        return x[0];
    };
    lin.lipschitz = 0.0;
    lin.growth_const = 1.0;
    lin.m = 1.0;
    const GridField ul = upsilon1(model, lin, u, v, lambda, tq, kRule);
    for (std::size_t i = 0; i < spec.total_nodes(); ++i) {
        const double x = ul.node_coords(i)[0];
        CHECK(std::abs(ul.value_at_node(i, 0) - x / 3.0) <= 1e-6);
    }

    // linearity of the map in F0
    HamiltonianSpec sum;
    sum.f0 = [](std::span<const double> x, double, std::span<const double>) {
        return x[0] + 3.0;
    };
    sum.lipschitz = 0.0;
    sum.growth_const = 4.0;
    sum.m = 1.0;
    const GridField us = upsilon1(model, sum, u, v, lambda, tq, kRule);
    for (std::size_t i = 0; i < spec.total_nodes(); ++i)
        CHECK(std::abs(us.value_at_node(i, 0) - uc.value_at_node(i, 0) -
                       ul.value_at_node(i, 0)) <= 1e-12);
}

TEST_CASE("upsilon2: constant kills the gradient, linear closed form, FD consistency") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 1.0);
    const double lambda = 2.0;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, unit_envelope(), 1e-8);
    const GridSpec spec = GridSpec::symmetric(1, 2.0, 9);
    const GridField u = zero_field(spec, 1, 1.0);
    const GridField v = zero_field(spec, 1, 1.0);

    const GridField vc = upsilon2(model, constant_f0(3.0), u, v, lambda, tq, kRule);
    for (std::size_t i = 0; i < spec.total_nodes(); ++i)
        CHECK(std::abs(vc.value_at_node(i, 0)) <= 1e-8);

    HamiltonianSpec lin;
    lin.f0 = [](std::span<const double> x, double, std::span<const double>) {
        return x[0];
    };
    lin.lipschitz = 0.0;
    lin.growth_const = 1.0;
    lin.m = 1.0;
    const GridField vl = upsilon2(model, lin, u, v, lambda, tq, kRule);
    for (std::size_t i = 0; i < spec.total_nodes(); ++i)
        CHECK(std::abs(vl.value_at_node(i, 0) - 1.0 / 3.0) <= 1e-6);

    // Upsilon2 is the G-gradient of Upsilon1: interior finite differences
    HamiltonianSpec smooth;
    smooth.f0 = [](std::span<const double> x, double, std::span<const double>) {
        return std::sin(x[0]);
    };
    smooth.lipschitz = 0.0;
    smooth.growth_const = 1.0;
    smooth.m = 0.0;
    const GridSpec fine = GridSpec::symmetric(1, 2.0, 41);
    const GridField uf = zero_field(fine, 1, 0.0);
    const GridField vf = zero_field(fine, 1, 0.0);
    const GridField u1 = upsilon1(model, smooth, uf, vf, lambda, tq, kRule);
    const GridField u2 = upsilon2(model, smooth, uf, vf, lambda, tq, kRule);
    const double h = 4.0 / 40.0;
    for (std::size_t i = 5; i + 5 < fine.total_nodes(); ++i) {
        // fourth-order central stencil keeps the FD truncation error ~ h^4
        const double fd = (-u1.value_at_node(i + 2, 0) + 8.0 * u1.value_at_node(i + 1, 0) -
                           8.0 * u1.value_at_node(i - 1, 0) + u1.value_at_node(i - 2, 0)) /
                          (12.0 * h);
        CHECK(std::abs(fd - u2.value_at_node(i, 0)) <= 1e-4);
    }
}

TEST_CASE("Picard: constant nonlinearity converges immediately") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const double lambda = 2.0;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, unit_envelope(), 1e-10);
    PicardConfig cfg;
    cfg.lambda = lambda;
    cfg.grid = GridSpec::symmetric(1, 2.0, 9);
    cfg.tol = 1e-8;
    const auto res = solve_picard(model, constant_f0(3.0), cfg, tq, kRule);
    CHECK(res.report.converged);
    CHECK(res.report.iterations <= 2);
    for (std::size_t i = 0; i < cfg.grid.total_nodes(); ++i) {
        CHECK(res.u.value_at_node(i, 0) == doctest::Approx(1.5).epsilon(1e-6));
        CHECK(std::abs(res.v.value_at_node(i, 0)) <= 1e-7);
    }
    CHECK(res.report.final_residual <= 1e-10);
}

TEST_CASE("Picard: linear F0 reproduces the diagonal resolvent formula") {
    const DiagonalModel model({1.0, 0.5}, {1.0, 0.7}, {1.0, 1.0}, 1.0);
    const double lambda = 2.0;
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, unit_envelope(), 1e-8);
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
    const auto res = solve_picard(model, lin, cfg, tq, kRule);
    CHECK(res.report.converged);
    for (std::size_t i = 0; i < cfg.grid.total_nodes(); ++i) {
        const auto x = res.u.node_coords(i);
        const double exact = c[0] * x[0] / (lambda + model.alpha()[0]) +
                             c[1] * x[1] / (lambda + model.alpha()[1]);
        CHECK(std::abs(res.u.value_at_node(i, 0) - exact) <= 1e-4);
    }
}

TEST_CASE("Picard: nonlinear contraction ratios track alpha(lambda)") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const double lambda = 8.0;
    const auto env = unit_envelope();
    const double alpha_l = contraction_constant(1.0, 1.0, 0.0, 0.0, env, lambda);
    REQUIRE(alpha_l < 1.0);
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);

    HamiltonianSpec F0;
    F0.f0 = [](std::span<const double>, double y, std::span<const double> z) {
        return std::sin(y) + 0.5 * std::tanh(z[0]);
    };
    F0.lipschitz = 1.0;
    F0.growth_const = 1.5;
    F0.m = 0.0;
    PicardConfig cfg;
    cfg.lambda = lambda;
    cfg.grid = GridSpec::symmetric(1, 2.0, 11);
    cfg.tol = 1e-9;
    cfg.max_iter = 40;
    cfg.alpha_lambda = alpha_l;
    const auto res = solve_picard(model, F0, cfg, tq, kRule);
    CHECK(res.report.converged);
    for (std::size_t i = 2; i < res.report.contraction_ratios.size(); ++i)
        CHECK(res.report.contraction_ratios[i] <= alpha_l + 0.05);
    // deltas nonincreasing after burn-in
    for (std::size_t i = 3; i < res.report.deltas.size(); ++i)
        CHECK(res.report.deltas[i] <= res.report.deltas[i - 1] * (1.0 + 1e-9));
    CHECK(res.report.gradient_consistency <= 1e-2);
}

TEST_CASE("residual detects perturbations; uniqueness under re-initialization") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const double lambda = 8.0;
    const auto env = unit_envelope();
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);
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
    cfg.max_iter = 50;
    cfg.alpha_lambda = contraction_constant(1.0, 1.0, 0.0, 0.0, env, lambda);
    const auto res = solve_picard(model, F0, cfg, tq, kRule);
    REQUIRE(res.report.converged);
    CHECK(res.report.final_residual <= 2.0 * cfg.tol + 1e-6);

    // perturbing u inflates the residual by about the perturbation size
    std::vector<double> bumped(res.u.values());
    for (double& v : bumped) v += 0.1;
    const GridField ub(cfg.grid, 1, 0.0, std::move(bumped));
    const double r = residual_check(model, F0, lambda, ub, res.v, tq, kRule);
    CHECK(r >= 0.05);
    CHECK(r <= 0.15);

    // manual Picard from a nonzero start lands on the same fixed point
    CounterRng rng(3, 0);
    GridField u2 = GridField::sample_scalar(cfg.grid, 0.0, [&](std::span<const double> x) {
        return std::sin(3.0 * x[0]) + 0.5;
    });
    GridField v2 = GridField::sample_scalar(cfg.grid, 0.0, [&](std::span<const double> x) {
        return std::cos(2.0 * x[0]);
    });
    for (int it = 0; it < 30; ++it) {
        GridField nu = upsilon1(model, F0, u2, v2, lambda, tq, kRule);
        GridField nv = upsilon2(model, F0, u2, v2, lambda, tq, kRule);
        u2 = std::move(nu);
        v2 = std::move(nv);
    }
    CHECK(g_pair_norm(u2 - res.u, v2 - res.v) <= 2.0 * cfg.tol + 1e-6);
}

TEST_CASE("contraction inequality on random bounded field pairs") {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const double lambda = 8.0;
    const auto env = unit_envelope();
    const double alpha_l = contraction_constant(1.0, 1.0, 0.0, 0.0, env, lambda);
    const auto tq = TimeQuadrature::build(lambda, 0.0, 0.0, env, 1e-8);
    HamiltonianSpec F0;
    F0.f0 = [](std::span<const double>, double y, std::span<const double> z) {
        return std::sin(y) + 0.5 * std::tanh(z[0]);
    };
    F0.lipschitz = 1.0;
    F0.growth_const = 1.5;
    F0.m = 0.0;
    const GridSpec spec = GridSpec::symmetric(1, 2.0, 11);

    CounterRng rng(9, 0);
    std::uint64_t c = 0;
    for (int trial = 0; trial < 3; ++trial) {
        const double a1 = rng.uniform(c++), b1 = rng.uniform(c++);
        const double a2 = rng.uniform(c++), b2 = rng.uniform(c++);
        const GridField u1 = GridField::sample_scalar(
            spec, 0.0, [&](std::span<const double> x) { return a1 * std::sin(x[0]); });
        const GridField v1 = GridField::sample_scalar(
            spec, 0.0, [&](std::span<const double> x) { return b1 * std::cos(x[0]); });
        const GridField u2 = GridField::sample_scalar(
            spec, 0.0, [&](std::span<const double> x) { return a2 * std::cos(2.0 * x[0]); });
        const GridField v2 = GridField::sample_scalar(
            spec, 0.0, [&](std::span<const double> x) { return b2 * std::sin(2.0 * x[0]); });

        const double before = g_pair_norm(u1 - u2, v1 - v2);
        const GridField du = upsilon1(model, F0, u1, v1, lambda, tq, kRule) -
                             upsilon1(model, F0, u2, v2, lambda, tq, kRule);
        const GridField dv = upsilon2(model, F0, u1, v1, lambda, tq, kRule) -
                             upsilon2(model, F0, u2, v2, lambda, tq, kRule);
        CHECK(g_pair_norm(du, dv) <= (alpha_l + 0.05) * before + 1e-8);
    }
}

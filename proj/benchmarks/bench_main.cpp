#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mildhjb/certificates.hpp"
#include "mildhjb/mild_solver.hpp"
#include "mildhjb/sde.hpp"
#include "mildhjb/semigroup.hpp"
#include "mildhjb/time_quadrature.hpp"

namespace {

using namespace mildhjb;

DiagonalModel big_model(int d) {
    std::vector<double> alpha(d), q(d), g(d);
    for (int n = 0; n < d; ++n) {
        alpha[n] = static_cast<double>(n + 1) * (n + 1);
        q[n] = 1.0 / (n + 1);
        g[n] = std::sqrt(q[n]);
    }
    return DiagonalModel(alpha, q, g, 0.0);
}

const ScalarField kSin = [](std::span<const double> x) { return std::sin(x[0]); };

EnvelopeFit fit_envelope(const DiagonalModel& model) {
    std::vector<double> t_grid;
    for (double t = 1e-4; t <= 4.0; t *= 1.3) t_grid.push_back(t);
    return gamma_envelope(model, t_grid);
}

void BM_QtDiagonal(benchmark::State& state) {
    const DiagonalModel model = big_model(static_cast<int>(state.range(0)));
    double t = 0.0;
    for (auto _ : state) {
        t += 1e-6;
        benchmark::DoNotOptimize(qt_diagonal(model, 0.5 + t));
    }
}
BENCHMARK(BM_QtDiagonal)->Arg(16)->Arg(256)->Arg(4096);

void BM_GammaG(benchmark::State& state) {
    const DiagonalModel model = big_model(static_cast<int>(state.range(0)));
    double t = 0.0;
    for (auto _ : state) {
        t += 1e-6;
        benchmark::DoNotOptimize(gamma_g(model, 0.1 + t));
    }
}
BENCHMARK(BM_GammaG)->Arg(16)->Arg(256)->Arg(4096);

void BM_ApplySemigroup(benchmark::State& state) {
    const DiagonalModel model = big_model(2);
    const QuadratureRule rule =
        QuadratureRule::gauss_hermite_rule(static_cast<int>(state.range(0)));
    const std::vector<double> x = {0.3, -0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(apply_semigroup(model, 0.5, kSin, x, rule));
}
BENCHMARK(BM_ApplySemigroup)->Arg(8)->Arg(16)->Arg(32);

void BM_GGradientSemigroup(benchmark::State& state) {
    const DiagonalModel model = big_model(2);
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(24);
    const std::vector<double> x = {0.3, -0.2};
    const double t = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(g_gradient_semigroup(model, t, kSin, x, rule));
}
BENCHMARK(BM_GGradientSemigroup)->Arg(0)->Arg(2)->Arg(4);

void BM_TimeQuadratureBuild(benchmark::State& state) {
    const EnvelopeFit env = fit_envelope(big_model(64));
    for (auto _ : state)
        benchmark::DoNotOptimize(TimeQuadrature::build(6.0, 1.0, 1.0, env, 1e-8));
}
BENCHMARK(BM_TimeQuadratureBuild);

void BM_ContractionQuadrature(benchmark::State& state) {
    const EnvelopeFit env = fit_envelope(big_model(64));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            contraction_constant_quadrature(1.0, 1.0, 1.0, 1.0, env, 6.0));
}
BENCHMARK(BM_ContractionQuadrature);

void BM_Upsilon1Sweep(benchmark::State& state) {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const EnvelopeFit env = fit_envelope(model);
    const double lambda = 6.0;
    const TimeQuadrature tq = TimeQuadrature::build(lambda, 1.0, 1.0, env, 1e-6);
    const QuadratureRule rule = QuadratureRule::gauss_hermite_rule(24);
    const GridSpec spec = GridSpec::symmetric(1, 2.0, static_cast<int>(state.range(0)));
    const GridField u(spec, 1, 0.0, std::vector<double>(spec.total_nodes(), 0.0));
    const GridField v(spec, 1, 0.0, std::vector<double>(spec.total_nodes(), 0.0));
    HamiltonianSpec f0;
    f0.f0 = [](std::span<const double> x, double, std::span<const double>) {
        return std::sin(x[0]);
    };
    f0.lipschitz = 0.0;
    f0.growth_const = 1.0;
    f0.m = 0.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(upsilon1(model, f0, u, v, lambda, tq, rule));
}
BENCHMARK(BM_Upsilon1Sweep)->Arg(21)->Arg(41);

void BM_SimulateMild(benchmark::State& state) {
    const DiagonalModel model = big_model(4);
    const DriftSpec drift = DriftSpec::zero(4);
    const std::vector<double> x = {1.0, 0.5, 0.25, 0.125};
    const long count = state.range(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            simulate_mild(model, drift, x, 1.0, 0.01, count, 42));
    state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_SimulateMild)->Arg(100)->Arg(1000);

void BM_BelGradient(benchmark::State& state) {
    const DiagonalModel model({1.0}, {1.0}, {1.0}, 0.0);
    const DriftSpec drift = DriftSpec::zero(1);
    const long count = state.range(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            bel_gradient(model, drift, 0.5, kSin, {0.8}, {1.0}, 0.01, count, 42));
    state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_BelGradient)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();

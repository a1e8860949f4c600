#include "mildhjb/mild_solver.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "mildhjb/rng.hpp"
#include "mildhjb/semigroup.hpp"

namespace mildhjb {

void HamiltonianSpec::validate(int dim, double box, int probes, std::uint64_t seed) const {
    CounterRng rng(seed, 0);
    std::vector<double> x(dim), z1(dim), z2(dim);
    std::uint64_t c = 0;
    for (int p = 0; p < probes; ++p) {
        for (int n = 0; n < dim; ++n) x[n] = box * (2.0 * rng.uniform(c++) - 1.0);
        const double y1 = 2.0 * rng.uniform(c++) - 1.0;
        const double y2 = 2.0 * rng.uniform(c++) - 1.0;
        double dz = 0.0, z2norm = 0.0;
        for (int n = 0; n < dim; ++n) {
            z1[n] = 2.0 * rng.uniform(c++) - 1.0;
            z2[n] = 2.0 * rng.uniform(c++) - 1.0;
            dz += (z1[n] - z2[n]) * (z1[n] - z2[n]);
            z2norm += z2[n] * z2[n];
        }
        const double f1 = f0(x, y1, z1);
        const double f2 = f0(x, y2, z2);
        require(std::abs(f1 - f2) <=
                    lipschitz * (std::abs(y1 - y2) + std::sqrt(dz)) * (1.0 + 1e-9) + 1e-12,
                "HamiltonianSpec: sampled Lipschitz violation");
        double r = 0.0;
        for (double xa : x) r += xa * xa;
        const double growth = growth_const *
            (1.0 + (m > 0.0 ? std::pow(std::sqrt(r), m) : 0.0) + std::abs(y2) +
             std::sqrt(z2norm));
        require(std::abs(f2) <= growth * (1.0 + 1e-9) + 1e-12,
                "HamiltonianSpec: sampled growth violation");
    }
}

namespace {

// psi(.) = F_0(., u(.), v(.)): F_0 exact at the evaluation point, (u, v)
// through their grid interpolants.
ScalarField make_psi(const HamiltonianSpec& F0, const GridField& u,
                     const GridField& v) {
    return [&F0, &u, &v](std::span<const double> x) {
        std::vector<double> z(v.components());
        v.eval_all(x, z);
        return F0.f0(x, u.eval(x), z);
    };
}

void check_common_grid(const GridField& u, const GridField& v) {
    require(u.components() == 1, "mild solver: u must be scalar");
    require(u.spec().lo == v.spec().lo && u.spec().hi == v.spec().hi &&
                u.spec().nodes == v.spec().nodes,
            "mild solver: u and v must share a grid");
}

}  // namespace

GridField upsilon1(const DiagonalModel& model, const HamiltonianSpec& F0,
                   const GridField& u, const GridField& v, double lambda,
                   const TimeQuadrature& tq, const QuadratureRule& rule,
                   int threads) {
    check_common_grid(u, v);
    require(std::abs(lambda - tq.lambda()) <= 1e-12 * (1.0 + std::abs(lambda)),
            "upsilon1: lambda inconsistent with time quadrature");
    const ScalarField psi_fn = make_psi(F0, u, v);

    const std::size_t total = u.spec().total_nodes();
    std::vector<double> out(total, 0.0);
    const auto& nodes = tq.regular_nodes();
    const auto& weights = tq.regular_weights();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double s = nodes[j];
        const double w = weights[j] * std::exp(-lambda * s);
        const DiagCovariance cov = qt_diagonal(model, s);
        parallel_for(total, threads, [&](std::size_t node) {
            const auto x = u.node_coords(node);
            out[node] += w * expectation(cov, model.apply_semigroup_matrix(s, x),
                                         psi_fn, rule);
        });
    }
    return GridField(u.spec(), 1, u.growth_order(), std::move(out));
}

GridField upsilon2(const DiagonalModel& model, const HamiltonianSpec& F0,
                   const GridField& u, const GridField& v, double lambda,
                   const TimeQuadrature& tq, const QuadratureRule& rule,
                   int threads) {
    check_common_grid(u, v);
    require(tq.theta() < 1.0, "upsilon2: gamma envelope exponent must be < 1");
    const ScalarField psi_fn = make_psi(F0, u, v);

    const int d = model.dim();
    const std::size_t total = u.spec().total_nodes();
    std::vector<double> out(total * d, 0.0);
    const auto& nodes = tq.singular_nodes();
    const auto& weights = tq.singular_weights();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double s = nodes[j];
        const double w = weights[j] * std::exp(-lambda * s);
        parallel_for(total, threads, [&](std::size_t node) {
            const auto x = u.node_coords(node);
            const auto grad = g_gradient_semigroup(model, s, psi_fn, x, rule);
            for (int n = 0; n < d; ++n) out[node * d + n] += w * grad[n];
        });
    }
    return GridField(u.spec(), d, v.growth_order(), std::move(out));
}

PicardResult solve_picard(const DiagonalModel& model, const HamiltonianSpec& F0,
                          const PicardConfig& cfg, const TimeQuadrature& tq,
                          const QuadratureRule& rule) {
    require(cfg.tol > 0.0, "solve_picard: tol must be > 0");
    cfg.grid.validate();
    const int d = model.dim();
    const std::size_t total = cfg.grid.total_nodes();

    GridField u(cfg.grid, 1, F0.m, std::vector<double>(total, 0.0));
    GridField v(cfg.grid, d, F0.m, std::vector<double>(total * d, 0.0));

    SolveReport rep;
    rep.lambda = cfg.lambda;
    rep.lambda0 = cfg.lambda0;
    rep.alpha_lambda = cfg.alpha_lambda;
    rep.tail_bound = tq.tail_bound_scalar() + tq.tail_bound_gradient();

    // A-posteriori contraction stopping rule.
    double stop_tol = cfg.tol;
    if (cfg.alpha_lambda > 0.0 && cfg.alpha_lambda < 1.0)
        stop_tol = cfg.tol * (1.0 - cfg.alpha_lambda) / cfg.alpha_lambda;

    for (int it = 0; it < cfg.max_iter; ++it) {
        GridField nu = upsilon1(model, F0, u, v, cfg.lambda, tq, rule, cfg.threads);
        GridField nv = upsilon2(model, F0, u, v, cfg.lambda, tq, rule, cfg.threads);
        const double delta = g_pair_norm(nu - u, nv - v);
        rep.deltas.push_back(delta);
        if (rep.deltas.size() >= 2 && rep.deltas[rep.deltas.size() - 2] > 0.0)
            rep.contraction_ratios.push_back(delta / rep.deltas[rep.deltas.size() - 2]);
        u = std::move(nu);
        v = std::move(nv);
        rep.iterations = it + 1;
        if (delta <= stop_tol) {
            rep.converged = true;
            break;
        }
    }

    rep.final_residual = residual_check(model, F0, cfg.lambda, u, v, tq, rule,
                                        cfg.threads);

    // Spot check that v is the G-gradient of u: node-based central differences
    // scaled by g_n.
    double worst = 0.0;
    for (int a = 0; a < d; ++a) {
        if (cfg.grid.nodes[a] < 3) continue;
        const double h = (cfg.grid.hi[a] - cfg.grid.lo[a]) / (cfg.grid.nodes[a] - 1);
        std::size_t stride = 1;
        for (int b = a + 1; b < d; ++b) stride *= static_cast<std::size_t>(cfg.grid.nodes[b]);
        const std::size_t probe = total / 2;  // central node
        if (probe < stride || probe + stride >= total) continue;
        const double fd =
            (u.value_at_node(probe + stride, 0) - u.value_at_node(probe - stride, 0)) /
            (2.0 * h) * model.g()[a];
        worst = std::max(worst, std::abs(fd - v.value_at_node(probe, a)));
    }
    rep.gradient_consistency = worst;

    return PicardResult{std::move(u), std::move(v), std::move(rep)};
}

double residual_check(const DiagonalModel& model, const HamiltonianSpec& F0,
                      double lambda, const GridField& u, const GridField& v,
                      const TimeQuadrature& tq, const QuadratureRule& rule,
                      int threads) {
    const GridField fixed = upsilon1(model, F0, u, v, lambda, tq, rule, threads);
    return weighted_norm(u - fixed);
}

std::string SolveReport::to_json() const {
    nlohmann::json j;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["deltas"] = deltas;
    j["contraction_ratios"] = contraction_ratios;
    j["final_residual"] = final_residual;
    j["gradient_consistency"] = gradient_consistency;
    j["lambda"] = lambda;
    j["lambda0"] = lambda0;
    j["alpha_lambda"] = alpha_lambda;
    j["tail_bound"] = tail_bound;
    return j.dump(2);
}

}  // namespace mildhjb

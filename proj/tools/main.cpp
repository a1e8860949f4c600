// mildhjb command-line driver: certify / semigroup / grad / solve / simulate /
// neumann-demo. Every run writes a manifest JSON with the config hash, the
// effective seeds, and the wall time; numeric CSV uses 17 significant digits
// with LF line endings.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "mildhjb/certificates.hpp"
#include "mildhjb/control.hpp"
#include "mildhjb/covariance.hpp"
#include "mildhjb/grid_field.hpp"
#include "mildhjb/mild_solver.hpp"
#include "mildhjb/model.hpp"
#include "mildhjb/quadrature.hpp"
#include "mildhjb/rng.hpp"
#include "mildhjb/sde.hpp"
#include "mildhjb/semigroup.hpp"
#include "mildhjb/time_quadrature.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mildhjb;

namespace {

struct RunContext {
    json config;
    fs::path out;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string command;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point started;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw invalid_input(std::string("config JSON parse error: ") + e.what());
    }
    return j;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& ctx) {
    require(j.is_object(), ctx + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed) ok = ok || it.key() == k;
        require(ok, ctx + ": unknown key '" + it.key() + "'");
    }
}

std::uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
    return h;
}

void write_text(const RunContext& ctx, const std::string& name, const std::string& text) {
    std::ofstream out(ctx.out / name, std::ios::binary);
    require(static_cast<bool>(out), "cannot write artifact: " + name);
    out << text;
}

void write_csv(RunContext& ctx, const std::string& name,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += header[i];
    }
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += fmt17(row[i]);
        }
        text += '\n';
    }
    write_text(ctx, name, text);
    ctx.artifacts.push_back(name);
}

void write_json_artifact(RunContext& ctx, const std::string& name, const json& j) {
    write_text(ctx, name, j.dump(2) + "\n");
    ctx.artifacts.push_back(name);
}

void write_manifest(RunContext& ctx) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - ctx.started);
    json m;
    m["command"] = ctx.command;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(ctx.config)));
    m["config_hash"] = hash;
    m["seed"] = ctx.seed;
    m["threads"] = ctx.threads;
    m["wall_time_ms"] = elapsed.count();
    m["artifacts"] = ctx.artifacts;
    m["version"] = "mildhjb 1.0.0";
    write_text(ctx, "manifest.json", m.dump(2) + "\n");
}

DiagonalModel parse_model(const json& cfg) {
    require(cfg.contains("model"), "config: missing 'model'");
    const json& jm = cfg.at("model");
    if (jm.is_string())
        return DiagonalModel::from_json(load_json_file(jm.get<std::string>()).dump());
    check_keys(jm, {"dim", "alpha", "q", "g", "m", "rates"}, "model");
    return DiagonalModel::from_json(jm.dump());
}

QuadratureRule parse_rule(const json& cfg) {
    if (!cfg.contains("quadrature")) return QuadratureRule{};
    check_keys(cfg.at("quadrature"), {"method", "order", "samples", "seed"}, "quadrature");
    return QuadratureRule::from_json(cfg.at("quadrature").dump());
}

ScalarField parse_phi(const json& cfg) {
    require(cfg.contains("phi"), "config: missing 'phi'");
    const json& jp = cfg.at("phi");
    check_keys(jp, {"type", "c"}, "phi");
    const std::string type = jp.value("type", std::string("sin"));
    if (type == "sin") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return std::sin(s);
        };
    }
    if (type == "cos") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return std::cos(s);
        };
    }
    if (type == "gaussian") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return std::exp(-0.5 * s);
        };
    }
    if (type == "quadratic") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return 1.0 + s;
        };
    }
    if (type == "linear") {
        require(jp.contains("c"), "phi: linear type needs coefficient list 'c'");
        auto c = jp.at("c").get<std::vector<double>>();
        return [c](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t n = 0; n < x.size() && n < c.size(); ++n) s += c[n] * x[n];
            return s;
        };
    }
    throw invalid_input("phi: unknown type '" + type + "'");
}

std::vector<std::vector<double>> parse_points(const json& cfg, int dim) {
    require(cfg.contains("points"), "config: missing 'points'");
    std::vector<std::vector<double>> pts;
    for (const auto& row : cfg.at("points")) {
        auto p = row.get<std::vector<double>>();
        require(static_cast<int>(p.size()) == dim, "points: dimension mismatch");
        pts.push_back(std::move(p));
    }
    require(!pts.empty(), "points: empty list");
    return pts;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    return out;
}

std::vector<std::string> coord_header(int dim) {
    std::vector<std::string> h;
    for (int n = 0; n < dim; ++n) h.push_back("x" + std::to_string(n));
    return h;
}

// ---------------------------------------------------------------- certify

int cmd_certify(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg,
               {"model", "lipschitz", "growth_const", "growth_rate", "t_grid",
                "neumann_estimate", "seed", "threads"},
               "certify config");
    const DiagonalModel model = parse_model(cfg);
    const double L = cfg.value("lipschitz", 1.0);
    const double C = cfg.value("growth_const", 1.0);
    const double a = cfg.value("growth_rate", 0.0);
    double tlo = 1e-3, thi = 10.0;
    int tpoints = 25;
    if (cfg.contains("t_grid")) {
        check_keys(cfg.at("t_grid"), {"lo", "hi", "points"}, "t_grid");
        tlo = cfg.at("t_grid").value("lo", tlo);
        thi = cfg.at("t_grid").value("hi", thi);
        tpoints = cfg.at("t_grid").value("points", tpoints);
    }

    const CertificateReport rep = certify(model, L, C, a, logspace(tlo, thi, tpoints));
    json out = json::parse(rep.to_json());
    bool pass = rep.all_passed();

    if (cfg.contains("neumann_estimate")) {
        const json& jn = cfg.at("neumann_estimate");
        check_keys(jn, {"delta", "eps", "modes", "t_lo", "t_hi", "points"},
                   "neumann_estimate");
        const auto ner = neumann_estimate_check(
            jn.value("delta", 1.0), jn.value("eps", 0.1), jn.value("modes", 10000),
            logspace(jn.value("t_lo", 1e-4), jn.value("t_hi", 10.0),
                     jn.value("points", 60)));
        out["neumann_estimate"] = {{"pass", ner.pass},
                                   {"c0", ner.c0},
                                   {"worst_ratio", ner.worst_ratio}};
        pass = pass && ner.pass;
    }

    out["pass"] = pass;
    write_json_artifact(ctx, "certificate.json", out);
    return pass ? 0 : 1;
}

// -------------------------------------------------------------- semigroup

int cmd_semigroup(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, {"model", "t", "phi", "points", "quadrature", "seed", "threads"},
               "semigroup config");
    const DiagonalModel model = parse_model(cfg);
    require(cfg.contains("t"), "config: missing 't'");
    const double t = cfg.at("t").get<double>();
    const ScalarField phi = parse_phi(cfg);
    const QuadratureRule rule = parse_rule(cfg);
    const auto pts = parse_points(cfg, model.dim());

    std::vector<std::vector<double>> rows(pts.size());
    parallel_for(pts.size(), ctx.threads, [&](std::size_t i) {
        rows[i] = pts[i];
        rows[i].push_back(apply_semigroup(model, t, phi, pts[i], rule));
    });
    auto header = coord_header(model.dim());
    header.push_back("value");
    write_csv(ctx, "semigroup.csv", header, rows);
    return 0;
}

// ------------------------------------------------------------------- grad

int cmd_grad(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg,
               {"model", "t", "phi", "points", "quadrature", "method", "dt",
                "paths", "seed", "threads"},
               "grad config");
    const DiagonalModel model = parse_model(cfg);
    require(cfg.contains("t"), "config: missing 't'");
    const double t = cfg.at("t").get<double>();
    const ScalarField phi = parse_phi(cfg);
    const auto pts = parse_points(cfg, model.dim());
    const std::string method = cfg.value("method", std::string("exact"));
    const int d = model.dim();

    auto header = coord_header(d);
    std::vector<std::vector<double>> rows(pts.size());

    if (method == "exact") {
        const QuadratureRule rule = parse_rule(cfg);
        for (int n = 0; n < d; ++n) header.push_back("grad" + std::to_string(n));
        parallel_for(pts.size(), ctx.threads, [&](std::size_t i) {
            rows[i] = pts[i];
            const auto g = g_gradient_semigroup(model, t, phi, pts[i], rule);
            rows[i].insert(rows[i].end(), g.begin(), g.end());
        });
    } else if (method == "bel") {
        const double dt = cfg.value("dt", 1e-3);
        const long paths = cfg.value("paths", 100000L);
        const std::uint64_t sub = CounterRng::derive(ctx.seed, "grad-bel");
        for (int n = 0; n < d; ++n) {
            header.push_back("grad" + std::to_string(n));
            header.push_back("stderr" + std::to_string(n));
        }
        const DriftSpec drift = DriftSpec::zero(d);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            rows[i] = pts[i];
            for (int n = 0; n < d; ++n) {
                std::vector<double> h(d, 0.0);
                h[n] = 1.0;
                const auto est = bel_gradient(model, drift, t, phi, pts[i], h, dt,
                                              paths, CounterRng::mix(sub, i * d + n),
                                              ctx.threads);
                // G-gradient component: scale the directional derivative by g_n.
                rows[i].push_back(model.g()[n] * est.value);
                rows[i].push_back(model.g()[n] * est.stderr_);
            }
        }
    } else {
        throw invalid_input("grad: unknown method '" + method + "'");
    }
    write_csv(ctx, "grad.csv", header, rows);
    return 0;
}

// ------------------------------------------------------------------ solve

GridSpec parse_grid(const json& cfg, int dim) {
    require(cfg.contains("grid"), "config: missing 'grid'");
    const json& jg = cfg.at("grid");
    check_keys(jg, {"xmax", "nodes"}, "grid");
    return GridSpec::symmetric(dim, jg.value("xmax", 2.0), jg.value("nodes", 21));
}

void write_fields(RunContext& ctx, const GridField& u, const GridField& v) {
    const int d = u.spec().dim();
    auto header_u = coord_header(d);
    header_u.push_back("u");
    auto header_v = coord_header(d);
    for (int n = 0; n < v.components(); ++n) header_v.push_back("v" + std::to_string(n));

    const std::size_t total = u.spec().total_nodes();
    std::vector<std::vector<double>> rows_u(total), rows_v(total);
    for (std::size_t i = 0; i < total; ++i) {
        const auto x = u.node_coords(i);
        rows_u[i] = x;
        rows_u[i].push_back(u.value_at_node(i, 0));
        rows_v[i] = x;
        for (int n = 0; n < v.components(); ++n)
            rows_v[i].push_back(v.value_at_node(i, n));
    }
    write_csv(ctx, "u.csv", header_u, rows_u);
    write_csv(ctx, "v.csv", header_v, rows_v);
}

int cmd_solve(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg,
               {"model", "lambda", "hamiltonian", "grid", "quadrature", "tol",
                "max_iter", "seed", "threads"},
               "solve config");
    const DiagonalModel model = parse_model(cfg);
    require(cfg.contains("lambda"), "config: missing 'lambda'");
    const double lambda = cfg.at("lambda").get<double>();
    const QuadratureRule rule = parse_rule(cfg);
    const GridSpec grid = parse_grid(cfg, model.dim());
    const double tol = cfg.value("tol", 1e-6);
    const int max_iter = cfg.value("max_iter", 60);

    require(cfg.contains("hamiltonian"), "config: missing 'hamiltonian'");
    const json& jh = cfg.at("hamiltonian");
    check_keys(jh, {"type", "value", "c", "rho", "lcoef", "beta1_weighted_sup"},
               "hamiltonian");
    const std::string type = jh.value("type", std::string("constant"));

    if (type == "control") {
        require(jh.contains("lcoef"), "hamiltonian: control type needs 'lcoef'");
        ControlProblem problem{model, {}, {}, {}, nullptr};
        problem.lcoef = jh.at("lcoef").get<std::vector<std::vector<double>>>();
        problem.ctrl.rho = jh.value("rho", 1.0);
        problem.ctrl.dim = static_cast<int>(problem.lcoef.size());
        problem.gl_coef = problem.lcoef;
        for (int j = 0; j < problem.ctrl.dim; ++j)
            for (int n = 0; n < model.dim(); ++n)
                problem.gl_coef[j][n] *= model.g()[n];
        problem.beta1 = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
        problem.beta1_weighted_sup = jh.value("beta1_weighted_sup", 1.0);
        problem.lambda = lambda;
        HjbConfig hc{grid, rule, tol, max_iter, ctx.threads};
        HjbResult res = solve_hjb(problem, hc);
        write_fields(ctx, res.u, res.v);
        json rep = json::parse(res.report.to_json());
        rep["certificate"] = json::parse(res.certificate.to_json());
        write_json_artifact(ctx, "report.json", rep);
        return res.report.converged ? 0 : 1;
    }

    // State-only nonlinearities: constant c or linear sum c_n x_n. These do
    // not couple back through (u, v), so the fixed point is the plain
    // resolvent integral and L = 0.
    HamiltonianSpec F0;
    F0.m = model.m();
    F0.lipschitz = 0.0;
    if (type == "constant") {
        const double c = jh.value("value", 1.0);
        F0.f0 = [c](std::span<const double>, double, std::span<const double>) {
            return c;
        };
        F0.growth_const = std::abs(c);
    } else if (type == "linear") {
        require(jh.contains("c"), "hamiltonian: linear type needs 'c'");
        auto c = jh.at("c").get<std::vector<double>>();
        require(static_cast<int>(c.size()) == model.dim(),
                "hamiltonian: coefficient length mismatch");
        F0.f0 = [c](std::span<const double> x, double, std::span<const double>) {
            double s = 0.0;
            for (std::size_t n = 0; n < c.size(); ++n) s += c[n] * x[n];
            return s;
        };
        F0.m = std::max(F0.m, 1.0);
        double cn = 0.0;
        for (double v : c) cn += v * v;
        F0.growth_const = std::sqrt(cn) * std::sqrt(double(model.dim()));
    } else {
        throw invalid_input("hamiltonian: unknown type '" + type + "'");
    }

    const EnvelopeFit env = gamma_envelope(model, logspace(1e-3, 10.0, 25));
    const double omega = model.omega();
    double a = 0.0;
    if (omega > 1e-12)
        a = F0.m * omega;
    else if (omega >= -1e-12 && F0.m > 0.0)
        a = 1.0;
    require(lambda > a, "solve: lambda must exceed the growth rate");
    const TimeQuadrature tq = TimeQuadrature::build(lambda, a, a, env, tol);

    PicardConfig pc;
    pc.lambda = lambda;
    pc.grid = grid;
    pc.tol = tol;
    pc.max_iter = max_iter;
    pc.threads = ctx.threads;
    PicardResult res = solve_picard(model, F0, pc, tq, rule);
    write_fields(ctx, res.u, res.v);
    write_json_artifact(ctx, "report.json", json::parse(res.report.to_json()));
    return res.report.converged ? 0 : 1;
}

// --------------------------------------------------------------- simulate

int cmd_simulate(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg,
               {"model", "x0", "T", "dt", "count", "store_paths", "seed", "threads"},
               "simulate config");
    const DiagonalModel model = parse_model(cfg);
    const int d = model.dim();
    std::vector<double> x0(d, 0.0);
    if (cfg.contains("x0")) {
        x0 = cfg.at("x0").get<std::vector<double>>();
        require(static_cast<int>(x0.size()) == d, "x0: dimension mismatch");
    }
    const double T = cfg.value("T", 1.0);
    const double dt = cfg.value("dt", 1e-2);
    const long count = cfg.value("count", 1000L);
    const std::uint64_t sub = CounterRng::derive(ctx.seed, "simulate");

    const PathBatch batch = simulate_mild(model, DriftSpec::zero(d), x0, T, dt,
                                          count, sub, ctx.threads);

    // Per-step summary: time, mean and standard deviation per coordinate.
    std::vector<std::string> header = {"step", "t"};
    for (int n = 0; n < d; ++n) {
        header.push_back("mean" + std::to_string(n));
        header.push_back("std" + std::to_string(n));
    }
    std::vector<std::vector<double>> rows(batch.steps + 1);
    for (int k = 0; k <= batch.steps; ++k) {
        rows[k] = {static_cast<double>(k), k * dt};
        for (int n = 0; n < d; ++n) {
            std::vector<double> vals(count);
            for (long p = 0; p < count; ++p) vals[p] = batch.at(p, k, n);
            const double mean = pairwise_sum(vals) / count;
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            rows[k].push_back(mean);
            rows[k].push_back(count > 1 ? std::sqrt(ss / (count - 1)) : 0.0);
        }
    }
    write_csv(ctx, "summary.csv", header, rows);

    if (cfg.value("store_paths", false)) {
        // Flat little-endian binary: f64 header (dim, steps, dt, count), then
        // the row-major path data.
        std::ofstream bin(ctx.out / "paths.bin", std::ios::binary);
        require(static_cast<bool>(bin), "cannot write paths.bin");
        const double header_vals[4] = {static_cast<double>(d),
                                       static_cast<double>(batch.steps), dt,
                                       static_cast<double>(count)};
        bin.write(reinterpret_cast<const char*>(header_vals), sizeof(header_vals));
        bin.write(reinterpret_cast<const char*>(batch.data.data()),
                  static_cast<std::streamsize>(batch.data.size() * sizeof(double)));
        ctx.artifacts.push_back("paths.bin");
    }
    return 0;
}

// ----------------------------------------------------------- neumann-demo

int cmd_neumann_demo(RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg,
               {"delta", "eps", "modes", "noise_q", "rho", "lambda", "grid",
                "quadrature", "tol", "max_iter", "mc", "dp", "x_probe", "seed",
                "threads"},
               "neumann-demo config");
    const double delta = cfg.value("delta", 1.0);
    const double eps = cfg.value("eps", 0.1);
    const int modes = cfg.value("modes", 1);
    require(modes <= 2, "neumann-demo: DP comparison needs modes <= 2");
    std::vector<double> noise_q = {1.0};
    if (cfg.contains("noise_q")) noise_q = cfg.at("noise_q").get<std::vector<double>>();

    const NeumannModel nm = neumann_model(delta, eps, modes, noise_q);
    ControlProblem problem{nm.model, {}, nm.lcoef, nm.gl_coef, nullptr};
    problem.ctrl.rho = cfg.value("rho", 1.0);
    problem.ctrl.dim = 2;
    problem.beta1 = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    problem.beta1_weighted_sup = 1.0;
    problem.lambda = cfg.value("lambda", 6.0);

    const GridSpec grid = parse_grid(cfg, modes);
    HjbConfig hc{grid, parse_rule(cfg), cfg.value("tol", 1e-4),
                 cfg.value("max_iter", 60), ctx.threads};
    const HjbResult res = solve_hjb(problem, hc);

    json jdp = cfg.value("dp", json::object());
    check_keys(jdp, {"xmax", "state_nodes", "control_nodes", "dt"}, "dp");
    DpOracleConfig dpc;
    dpc.xmax = jdp.value("xmax", grid.hi[0]);
    dpc.state_nodes = jdp.value("state_nodes", 201);
    dpc.control_nodes = jdp.value("control_nodes", 9);
    dpc.dt = jdp.value("dt", 2e-4);
    const GridField dp = dp_oracle(problem, dpc);

    std::vector<std::vector<double>> probes;
    if (cfg.contains("x_probe")) {
        for (const auto& row : cfg.at("x_probe"))
            probes.push_back(row.get<std::vector<double>>());
    } else {
        for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0})
            probes.emplace_back(modes, c);
    }

    auto header = coord_header(modes);
    header.insert(header.end(), {"u_hjb", "u_dp", "rel_err"});
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (const auto& p : probes) {
        const double uh = res.u.eval(p);
        const double ud = dp.eval(p);
        const double rel = std::abs(uh - ud) / std::max(1.0, std::abs(ud));
        worst = std::max(worst, rel);
        auto row = p;
        row.insert(row.end(), {uh, ud, rel});
        rows.push_back(std::move(row));
    }
    write_csv(ctx, "comparison.csv", header, rows);

    json jmc = cfg.value("mc", json::object());
    check_keys(jmc, {"T", "dt", "count"}, "mc");
    const double T = jmc.value("T", 9.0 / problem.lambda + 1.0);
    const double mc_dt = jmc.value("dt", 1e-2);
    const long mc_count = jmc.value("count", 4000L);
    const Policy policy = feedback_policy(problem, res.v);
    const std::vector<double> x0(modes, 0.5);
    const PolicyValue rollout =
        evaluate_policy(problem, policy, x0, T, mc_dt, mc_count,
                        CounterRng::derive(ctx.seed, "neumann-demo"), ctx.threads);

    json out;
    out["solver"] = json::parse(res.report.to_json());
    out["certificate"] = json::parse(res.certificate.to_json());
    out["dp_comparison_worst_rel_err"] = worst;
    out["policy_rollout"] = {{"x0", x0},
                             {"value", rollout.value},
                             {"stderr", rollout.stderr_},
                             {"tail_bound", rollout.tail_bound},
                             {"horizon", T}};
    write_json_artifact(ctx, "demo.json", out);
    return (res.report.converged && res.certificate.all_passed()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mild solutions of semilinear elliptic HJB equations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 0;
    bool seed_set = false;

    const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
        {"certify", cmd_certify},       {"semigroup", cmd_semigroup},
        {"grad", cmd_grad},             {"solve", cmd_solve},
        {"simulate", cmd_simulate},     {"neumann-demo", cmd_neumann_demo}};

    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "path to the run config JSON")
            ->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "top-level seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--threads", threads, "worker thread cap");
    }

    CLI11_PARSE(app, argc, argv);

    RunContext ctx;
    ctx.started = std::chrono::steady_clock::now();
    try {
        ctx.config = load_json_file(config_path);
        ctx.command = app.get_subcommands().front()->get_name();
        ctx.out = out_dir;
        fs::create_directories(ctx.out);

        ctx.seed = seed_set ? seed : ctx.config.value("seed", std::uint64_t{1});
        if (threads > 0) {
            ctx.threads = threads;
        } else if (ctx.config.contains("threads")) {
            ctx.threads = ctx.config.at("threads").get<int>();
        } else if (const char* env = std::getenv("MILDHJB_THREADS")) {
            ctx.threads = std::max(1, std::atoi(env));
        } else {
            ctx.threads = 1;
        }

        int rc = 2;
        for (const auto& [name, fn] : commands) {
            if (name == ctx.command) rc = fn(ctx);
        }
        write_manifest(ctx);
        return rc;
    } catch (const invalid_input& e) {
        json err = {{"error", e.what()}, {"kind", "invalid-input"}, {"exit_code", 2}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err = {{"error", e.what()}, {"kind", "internal"}, {"exit_code", 2}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
}

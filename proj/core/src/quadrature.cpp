#include "mildhjb/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>

#include "mildhjb/rng.hpp"

namespace mildhjb {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the monic
// orthogonal polynomial recurrence, weights are mu0 * (first eigenvector
// component)^2.
Quad1D golub_welsch(const std::vector<double>& a, const std::vector<double>& b,
                    double mu0) {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = a[i];
        if (i + 1 < n) {
            const double off = std::sqrt(b[i + 1]);
            J(i, i + 1) = off;
            J(i + 1, i) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Quad1D out;
    out.nodes.resize(n);
    out.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        out.weights[i] = mu0 * v0 * v0;
    }
    return out;
}

}  // namespace

Quad1D gauss_hermite(int n) {
    require(n >= 1, "gauss_hermite: order must be >= 1");
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (int k = 1; k < n; ++k) b[k] = static_cast<double>(k);
    return golub_welsch(a, b, 1.0);
}

Quad1D gauss_jacobi01(int n, double theta) {
    require(n >= 1, "gauss_jacobi01: order must be >= 1");
    require(theta >= 0.0 && theta < 1.0, "gauss_jacobi01: theta must be in [0,1)");
    // Jacobi weight (1-x)^A (1+x)^B on [-1,1] with A = 0, B = -theta,
    // then the affine map s = (x+1)/2.
    const double A = 0.0, B = -theta;
    std::vector<double> a(n), b(n, 0.0);
    const double apb = A + B;
    a[0] = (B - A) / (apb + 2.0);
    for (int k = 1; k < n; ++k) {
        const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
        a[k] = (B * B - A * A) / den;
        const double num = 4.0 * k * (k + A) * (k + B) * (k + apb);
        const double d2 = (2.0 * k + apb) * (2.0 * k + apb) *
                          (2.0 * k + apb + 1.0) * (2.0 * k + apb - 1.0);
        b[k] = num / d2;
    }
    // mu0 = 2^{A+B+1} Gamma(A+1) Gamma(B+1) / Gamma(A+B+2).
    const double mu0 = std::pow(2.0, apb + 1.0) *
                       std::exp(std::lgamma(A + 1.0) + std::lgamma(B + 1.0) -
                                std::lgamma(apb + 2.0));
    Quad1D q = golub_welsch(a, b, mu0);
    // Map to [0,1]: s = (x+1)/2, and w(s) = s^{-theta} corresponds to
    // 2^{theta-1} (1+x)^{-theta} dx.
    const double scale = std::pow(2.0, theta - 1.0);
    for (int i = 0; i < n; ++i) {
        q.nodes[i] = 0.5 * (q.nodes[i] + 1.0);
        q.weights[i] *= scale;
    }
    return q;
}

Quad1D gauss_legendre01(int n) { return gauss_jacobi01(n, 0.0); }

QuadratureRule QuadratureRule::gauss_hermite_rule(int order) {
    QuadratureRule r;
    r.method = Method::GaussHermite;
    r.order = order;
    return r;
}

QuadratureRule QuadratureRule::monte_carlo_rule(long samples, std::uint64_t seed) {
    QuadratureRule r;
    r.method = Method::MonteCarlo;
    r.samples = samples;
    r.seed = seed;
    return r;
}

QuadratureRule QuadratureRule::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    QuadratureRule r;
    const std::string method = j.value("method", std::string("gauss-hermite"));
    if (method == "gauss-hermite") {
        r.method = Method::GaussHermite;
        r.order = j.value("order", 16);
        require(r.order >= 1, "QuadratureRule: order must be >= 1");
    } else if (method == "monte-carlo") {
        r.method = Method::MonteCarlo;
        r.samples = j.value("samples", 100000L);
        r.seed = j.value("seed", std::uint64_t{1});
        require(r.samples >= 1, "QuadratureRule: samples must be >= 1");
    } else {
        throw invalid_input("QuadratureRule: unknown method " + method);
    }
    return r;
}

std::string QuadratureRule::to_json() const {
    nlohmann::json j;
    if (method == Method::GaussHermite) {
        j["method"] = "gauss-hermite";
        j["order"] = order;
    } else {
        j["method"] = "monte-carlo";
        j["samples"] = samples;
        j["seed"] = seed;
    }
    return j.dump();
}

void gaussian_nodes(const DiagCovariance& cov, const QuadratureRule& rule,
                    const std::function<void(std::span<const double>, double)>& fn) {
    const int d = cov.dim();
    std::vector<double> y(d, 0.0);

    if (rule.method == QuadratureRule::Method::MonteCarlo) {
        const double w = 1.0 / static_cast<double>(rule.samples);
        CounterRng rng(rule.seed, 0);
        for (long i = 0; i < rule.samples; ++i) {
            for (int n = 0; n < d; ++n)
                y[n] = cov.sqrt_entry(n) *
                       rng.normal(static_cast<std::uint64_t>(i) * d + n);
            fn(y, w);
        }
        return;
    }

    // Tensor Gauss-Hermite over the axes with positive variance; degenerate
    // axes stay at 0.
    const Quad1D q1 = gauss_hermite(rule.order);
    std::vector<int> active;
    for (int n = 0; n < d; ++n)
        if (cov.lambda[n] > 0.0) active.push_back(n);
    const int da = static_cast<int>(active.size());
    if (da == 0) {
        fn(y, 1.0);
        return;
    }
    std::vector<int> idx(da, 0);
    while (true) {
        double w = 1.0;
        for (int k = 0; k < da; ++k) {
            const int n = active[k];
            y[n] = cov.sqrt_entry(n) * q1.nodes[idx[k]];
            w *= q1.weights[idx[k]];
        }
        fn(y, w);
        int k = da - 1;
        for (; k >= 0; --k) {
            if (++idx[k] < rule.order) break;
            idx[k] = 0;
        }
        if (k < 0) break;
    }
}

double expectation(const DiagCovariance& cov, const std::vector<double>& shift,
                   const std::function<double(std::span<const double>)>& phi,
                   const QuadratureRule& rule) {
    require(static_cast<int>(shift.size()) == cov.dim(),
            "expectation: shift dimension mismatch");
    std::vector<double> terms;
    std::vector<double> point(cov.dim());
    gaussian_nodes(cov, rule, [&](std::span<const double> y, double w) {
        for (int n = 0; n < cov.dim(); ++n) point[n] = shift[n] + y[n];
        terms.push_back(w * phi(point));
    });
    return pairwise_sum(terms);
}

std::vector<double> sample_gaussian(const DiagCovariance& cov, long count,
                                    std::uint64_t seed) {
    require(count >= 1, "sample_gaussian: count must be >= 1");
    const int d = cov.dim();
    std::vector<double> out(static_cast<std::size_t>(count) * d);
    for (long i = 0; i < count; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        for (int n = 0; n < d; ++n)
            out[static_cast<std::size_t>(i) * d + n] =
                cov.sqrt_entry(n) * rng.normal(static_cast<std::uint64_t>(n));
    }
    return out;
}

}  // namespace mildhjb

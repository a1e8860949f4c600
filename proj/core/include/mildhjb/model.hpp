#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mildhjb/util.hpp"

namespace mildhjb {

/// Declared asymptotic behavior of the spectral sequences beyond the
/// truncation: alpha_n ~ alpha_c * n^alpha_p, and similarly for q_n, g_n.
/// Used by the certificate checks only; the numerics never extrapolate.
struct Rates {
    double alpha_p = 0.0, alpha_c = 1.0;
    double q_p = 0.0, q_c = 1.0;
    double g_p = 0.0, g_c = 1.0;
};

/// Truncated spectral description of the linear part: A e_n = -alpha_n e_n,
/// Q e_n = q_n e_n (Q = sigma sigma*), G e_n = g_n e_n, together with the
/// polynomial growth order m of the function class. Immutable after
/// construction.
class DiagonalModel {
  public:
    DiagonalModel(std::vector<double> alpha, std::vector<double> q,
                  std::vector<double> g, double m,
                  std::optional<Rates> rates = std::nullopt);

    int dim() const { return static_cast<int>(alpha_.size()); }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& q() const { return q_; }
    const std::vector<double>& g() const { return g_; }
    double m() const { return m_; }
    const std::optional<Rates>& rates() const { return rates_; }

    // Semigroup bound |e^{tA}| <= M e^{omega t} in the self-adjoint diagonal
    // case: M = 1, omega = -min_n alpha_n.
    double omega() const { return -*std::min_element(alpha_.begin(), alpha_.end()); }

    /// e^{-t alpha_n} componentwise.
    std::vector<double> semigroup_factor(double t) const;

    /// e^{tA} x componentwise.
    std::vector<double> apply_semigroup_matrix(double t, const std::vector<double>& x) const;

    std::string to_json() const;
    static DiagonalModel from_json(const std::string& text);

  private:
    std::vector<double> alpha_, q_, g_;
    double m_;
    std::optional<Rates> rates_;
};

}  // namespace mildhjb

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mildhjb/util.hpp"

namespace mildhjb {

/// Tensor grid on a box [lo_i, hi_i] with nodes_i points per axis.
struct GridSpec {
    std::vector<double> lo, hi;
    std::vector<int> nodes;

    int dim() const { return static_cast<int>(lo.size()); }
    std::size_t total_nodes() const;
    double coord(int axis, int index) const;
    void validate() const;

    /// Symmetric box [-xmax, xmax]^d with n nodes per axis.
    static GridSpec symmetric(int dim, double xmax, int n);
};

/// Nodal representation of a scalar or K-vector field with polynomial growth
/// order m. Interpolation is multilinear inside the box; outside, the value is
/// clamped to the boundary and rescaled by (1+|x|^m)/(1+|x_clamped|^m) so the
/// extension stays in the C_m growth class. Immutable after construction.
class GridField {
  public:
    GridField(GridSpec spec, int components, double growth_order,
              std::vector<double> values);

    /// Sample fn at every grid node. fn fills a span of `components` values.
    static GridField sample(const GridSpec& spec, int components, double growth_order,
                            const std::function<void(std::span<const double>, std::span<double>)>& fn);

    /// Scalar convenience sampler.
    static GridField sample_scalar(const GridSpec& spec, double growth_order,
                                   const std::function<double(std::span<const double>)>& fn);

    const GridSpec& spec() const { return spec_; }
    int components() const { return components_; }
    double growth_order() const { return growth_order_; }
    const std::vector<double>& values() const { return values_; }

    double value_at_node(std::size_t node, int comp) const {
        return values_[node * components_ + comp];
    }
    std::vector<double> node_coords(std::size_t node) const;

    /// Multilinear evaluation of one component at an arbitrary point.
    double eval(std::span<const double> x, int comp = 0) const;
    /// All components at once.
    void eval_all(std::span<const double> x, std::span<double> out) const;

    GridField operator-(const GridField& other) const;
    GridField operator+(const GridField& other) const;

  private:
    GridSpec spec_;
    int components_;
    double growth_order_;
    std::vector<double> values_;
};

/// max over grid nodes of |value(x)| / (1 + |x|^m); the pointwise Euclidean
/// norm is used for vector fields.
double weighted_norm(const GridField& field);

/// |u|_{C_m} + |v|_{C_m} with v a K-vector field on the same grid.
double g_pair_norm(const GridField& u, const GridField& v);

}  // namespace mildhjb

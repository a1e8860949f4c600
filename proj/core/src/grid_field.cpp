#include "mildhjb/grid_field.hpp"

#include <cmath>

namespace mildhjb {

std::size_t GridSpec::total_nodes() const {
    std::size_t n = 1;
    for (int k : nodes) n *= static_cast<std::size_t>(k);
    return n;
}

double GridSpec::coord(int axis, int index) const {
    if (nodes[axis] == 1) return lo[axis];
    return lo[axis] + (hi[axis] - lo[axis]) * index / (nodes[axis] - 1);
}

void GridSpec::validate() const {
    require(!lo.empty(), "GridSpec: empty grid");
    require(lo.size() == hi.size() && lo.size() == nodes.size(),
            "GridSpec: lo/hi/nodes length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        require(nodes[i] >= 1, "GridSpec: node count must be >= 1");
        require(hi[i] >= lo[i], "GridSpec: hi < lo");
    }
}

GridSpec GridSpec::symmetric(int dim, double xmax, int n) {
    GridSpec s;
    s.lo.assign(dim, -xmax);
    s.hi.assign(dim, xmax);
    s.nodes.assign(dim, n);
    return s;
}

GridField::GridField(GridSpec spec, int components, double growth_order,
                     std::vector<double> values)
    : spec_(std::move(spec)), components_(components), growth_order_(growth_order),
      values_(std::move(values)) {
    spec_.validate();
    require(components_ >= 1, "GridField: components must be >= 1");
    require(growth_order_ >= 0.0, "GridField: growth order must be >= 0");
    require(values_.size() == spec_.total_nodes() * static_cast<std::size_t>(components_),
            "GridField: value array size mismatch");
}

GridField GridField::sample(const GridSpec& spec, int components, double growth_order,
                            const std::function<void(std::span<const double>, std::span<double>)>& fn) {
    spec.validate();
    const std::size_t total = spec.total_nodes();
    std::vector<double> values(total * components);
    std::vector<double> x(spec.dim());
    std::vector<int> idx(spec.dim(), 0);
    for (std::size_t node = 0; node < total; ++node) {
        for (int a = 0; a < spec.dim(); ++a) x[a] = spec.coord(a, idx[a]);
        fn(x, std::span<double>(values.data() + node * components, components));
        for (int a = spec.dim() - 1; a >= 0; --a) {
            if (++idx[a] < spec.nodes[a]) break;
            idx[a] = 0;
        }
    }
    return GridField(spec, components, growth_order, std::move(values));
}

GridField GridField::sample_scalar(const GridSpec& spec, double growth_order,
                                   const std::function<double(std::span<const double>)>& fn) {
    return sample(spec, 1, growth_order,
                  [&](std::span<const double> x, std::span<double> out) { out[0] = fn(x); });
}

std::vector<double> GridField::node_coords(std::size_t node) const {
    const int d = spec_.dim();
    std::vector<double> x(d);
    std::size_t rem = node;
    for (int a = d - 1; a >= 0; --a) {
        const std::size_t n = static_cast<std::size_t>(spec_.nodes[a]);
        x[a] = spec_.coord(a, static_cast<int>(rem % n));
        rem /= n;
    }
    return x;
}

namespace {
double vec_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}
}  // namespace

void GridField::eval_all(std::span<const double> x, std::span<double> out) const {
    const int d = spec_.dim();
    require(static_cast<int>(x.size()) == d, "GridField::eval: dimension mismatch");

    // Clamp into the box; record both the original and the clamped radius for
    // the growth-class extension factor.
    std::vector<double> xc(x.begin(), x.end());
    bool clamped = false;
    for (int a = 0; a < d; ++a) {
        if (xc[a] < spec_.lo[a]) { xc[a] = spec_.lo[a]; clamped = true; }
        if (xc[a] > spec_.hi[a]) { xc[a] = spec_.hi[a]; clamped = true; }
    }
    double scale = 1.0;
    if (clamped && growth_order_ > 0.0) {
        const double r = vec_norm(x);
        const double rc = vec_norm(xc);
        scale = (1.0 + std::pow(r, growth_order_)) / (1.0 + std::pow(rc, growth_order_));
    }

    // Multilinear weights per axis.
    std::vector<int> base(d);
    std::vector<double> frac(d);
    for (int a = 0; a < d; ++a) {
        if (spec_.nodes[a] == 1) { base[a] = 0; frac[a] = 0.0; continue; }
        const double h = (spec_.hi[a] - spec_.lo[a]) / (spec_.nodes[a] - 1);
        double u = (xc[a] - spec_.lo[a]) / h;
        int i = static_cast<int>(std::floor(u));
        if (i > spec_.nodes[a] - 2) i = spec_.nodes[a] - 2;
        if (i < 0) i = 0;
        base[a] = i;
        frac[a] = u - i;
    }

    for (auto& o : out) o = 0.0;
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t node = 0;
        for (int a = 0; a < d; ++a) {
            const int bit = (c >> a) & 1;
            int ia = base[a];
            if (spec_.nodes[a] == 1) {
                if (bit) { w = 0.0; break; }
            } else {
                ia += bit;
                w *= bit ? frac[a] : (1.0 - frac[a]);
            }
            node = node * static_cast<std::size_t>(spec_.nodes[a]) + static_cast<std::size_t>(ia);
        }
        if (w == 0.0) continue;
        for (int k = 0; k < components_; ++k)
            out[k] += w * values_[node * components_ + k];
    }
    for (auto& o : out) o *= scale;
}

double GridField::eval(std::span<const double> x, int comp) const {
    std::vector<double> tmp(components_);
    eval_all(x, tmp);
    return tmp[comp];
}

GridField GridField::operator-(const GridField& other) const {
    require(components_ == other.components_ && values_.size() == other.values_.size(),
            "GridField: mismatched operands");
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - other.values_[i];
    return GridField(spec_, components_, growth_order_, std::move(out));
}

GridField GridField::operator+(const GridField& other) const {
    require(components_ == other.components_ && values_.size() == other.values_.size(),
            "GridField: mismatched operands");
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + other.values_[i];
    return GridField(spec_, components_, growth_order_, std::move(out));
}

double weighted_norm(const GridField& field) {
    const std::size_t total = field.spec().total_nodes();
    require(total > 0, "weighted_norm: empty grid");
    const double m = field.growth_order();
    double best = 0.0;
    for (std::size_t node = 0; node < total; ++node) {
        const auto x = field.node_coords(node);
        double v2 = 0.0;
        for (int k = 0; k < field.components(); ++k) {
            const double v = field.value_at_node(node, k);
            v2 += v * v;
        }
        double r = 0.0;
        for (double xa : x) r += xa * xa;
        r = std::sqrt(r);
        const double w = std::sqrt(v2) / (1.0 + (m > 0.0 ? std::pow(r, m) : 0.0));
        if (w > best) best = w;
    }
    return best;
}

double g_pair_norm(const GridField& u, const GridField& v) {
    require(u.components() == 1, "g_pair_norm: u must be scalar");
    require(u.spec().lo == v.spec().lo && u.spec().hi == v.spec().hi &&
                u.spec().nodes == v.spec().nodes,
            "g_pair_norm: grid mismatch");
    return weighted_norm(u) + weighted_norm(v);
}

}  // namespace mildhjb

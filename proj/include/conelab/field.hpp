#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "conelab/geometry.hpp"

namespace conelab {

// Uniform tensor grid on a box, 1D or 2D, shared spacing h on all axes.
// Values are stored row-major with the last axis fastest:
// 2D index = i0 * n[1] + i1.
struct GridDomain {
    int dim = 0;
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    std::array<int, 2> n{};
    double h = 0.0;

    GridDomain() = default;
    GridDomain(int dim_, std::array<double, 2> lo_, std::array<double, 2> hi_,
               std::array<int, 2> n_);

    // Cube [lo,hi]^dim with n points per axis.
    static GridDomain box(int dim, double lo, double hi, int n_per_axis);

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
        return s;
    }
    std::size_t index(int i0, int i1 = 0) const {
        return dim == 1 ? static_cast<std::size_t>(i0)
                        : static_cast<std::size_t>(i0) * static_cast<std::size_t>(n[1]) + static_cast<std::size_t>(i1);
    }
    std::pair<int, int> multi_index(std::size_t idx) const {
        if (dim == 1) return {static_cast<int>(idx), 0};
        return {static_cast<int>(idx / static_cast<std::size_t>(n[1])),
                static_cast<int>(idx % static_cast<std::size_t>(n[1]))};
    }
    Vec point(int i0, int i1 = 0) const {
        Vec p(dim);
        p[0] = lo[0] + h * i0;
        if (dim == 2) p[1] = lo[1] + h * i1;
        return p;
    }
    Vec point(std::size_t idx) const {
        auto [i0, i1] = multi_index(idx);
        return point(i0, i1);
    }
    bool contains(const Vec& x, double slack = 0.0) const {
        for (int a = 0; a < dim; ++a)
            if (x[a] < lo[static_cast<std::size_t>(a)] - slack || x[a] > hi[static_cast<std::size_t>(a)] + slack) return false;
        return true;
    }
    // Nearest grid node to x (clamped to the box).
    std::size_t nearest_node(const Vec& x) const;
    double diameter() const;

    bool operator==(const GridDomain& o) const;
    bool operator!=(const GridDomain& o) const { return !(*this == o); }
};

struct RegionMask;

struct ScalarField {
    GridDomain dom;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridDomain& d, double fill = 0.0)
        : dom(d), v(d.size(), fill) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    double& at(int i0, int i1 = 0) { return v[dom.index(i0, i1)]; }
    double at(int i0, int i1 = 0) const { return v[dom.index(i0, i1)]; }

    void check_finite(const char* what) const;
    double max_abs() const;
    // max - min over an optional region (whole grid when region is null).
    double oscillation(const RegionMask* region = nullptr) const;

    template <class F>
    static ScalarField sample(const GridDomain& d, F&& f) {
        ScalarField u(d);
        for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] = f(d.point(i));
        return u;
    }
};

// dim components per node, interleaved (node-major).
struct VectorField {
    GridDomain dom;
    std::vector<double> v;

    VectorField() = default;
    explicit VectorField(const GridDomain& d)
        : dom(d), v(d.size() * static_cast<std::size_t>(d.dim), 0.0) {}

    Vec get(std::size_t i) const {
        Vec p(dom.dim);
        for (int a = 0; a < dom.dim; ++a) p[a] = v[i * static_cast<std::size_t>(dom.dim) + static_cast<std::size_t>(a)];
        return p;
    }
    void set(std::size_t i, const Vec& p) {
        for (int a = 0; a < dom.dim; ++a) v[i * static_cast<std::size_t>(dom.dim) + static_cast<std::size_t>(a)] = p[a];
    }
};

// Symmetric dim x dim matrix per node, packed upper triangle.
struct SymMatrixField {
    GridDomain dom;
    std::vector<double> v;

    SymMatrixField() = default;
    explicit SymMatrixField(const GridDomain& d)
        : dom(d), v(d.size() * static_cast<std::size_t>(SymMat::packed_size(d.dim)), 0.0) {}

    SymMat get(std::size_t i) const {
        SymMat m(dom.dim);
        const int ps = SymMat::packed_size(dom.dim);
        for (int k = 0; k < ps; ++k) m.a[static_cast<std::size_t>(k)] = v[i * static_cast<std::size_t>(ps) + static_cast<std::size_t>(k)];
        return m;
    }
    void set(std::size_t i, const SymMat& m) {
        const int ps = SymMat::packed_size(dom.dim);
        for (int k = 0; k < ps; ++k) v[i * static_cast<std::size_t>(ps) + static_cast<std::size_t>(k)] = m.a[static_cast<std::size_t>(k)];
    }
};

// Per-node boolean mask with a human-readable descriptor.
struct RegionMask {
    GridDomain dom;
    std::vector<std::uint8_t> m;
    std::string descriptor;

    RegionMask() = default;
    explicit RegionMask(const GridDomain& d, bool fill = false,
                        std::string desc = "explicit")
        : dom(d), m(d.size(), fill ? 1 : 0), descriptor(std::move(desc)) {}

    bool operator[](std::size_t i) const { return m[i] != 0; }
    void set(std::size_t i, bool b) { m[i] = b ? 1 : 0; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }

    static RegionMask full(const GridDomain& d);
    // Closed ball {|x - center| <= radius}.
    static RegionMask ball(const GridDomain& d, const Vec& center, double radius);
    // Nodes whose full central stencil (width cells in every axis) stays inside.
    static RegionMask interior(const GridDomain& d, int width = 1);

    RegionMask intersect(const RegionMask& o) const;
    RegionMask complement_within(const RegionMask& o) const;  // o \ this
    bool subset_of(const RegionMask& o) const;
};

// --- Discrete calculus -------------------------------------------------

// Second-order central differences on interior nodes, first-order
// one-sided on the boundary. Boundary rows are excluded from norm
// computations by callers via RegionMask::interior.
VectorField gradient_central(const ScalarField& u);

// 3-point second differences on the diagonal, 4-point cross stencil for
// mixed entries; shifted stencils at the boundary keep quadratic exactness.
SymMatrixField hessian_central(const ScalarField& u);

// --- Norms and measures -------------------------------------------------

// Riemann-sum L^p norm (h^dim * sum |g|^p)^(1/p); p = infinity gives max.
// p in (0,1) is computed as stated, no quasi-norm correction.
double lp_norm(const ScalarField& g, double p, const RegionMask& region);

// L^p norm of the forward-difference derivative matrix of V (Frobenius
// per node); backward differences at the top edge of each axis.
double w1p_seminorm(const VectorField& V, double p, const RegionMask& region);

// Vertex-count convention: every node weighs h^dim.
double measure(const RegionMask& mask);

struct DyadicSum {
    double S = 0.0;
    int k_max_used = 0;
};

// S = sum_{k>=1} M^{pk} |{x in region : g(x) > eta M^k}|, truncated at the
// first empty superlevel set.
DyadicSum dyadic_lp_sum(const ScalarField& g, double eta, double M, double p,
                        const RegionMask& region);

// u_tilde(y) = u(r*y + x0) / (r^(1+alpha) * level_factor), resampled by
// multilinear interpolation onto `target` (defaults to the source box
// mapped through (x - x0)/r with unchanged point counts).
ScalarField field_rescale(const ScalarField& u, double r, const Vec& x0,
                          double level_factor, double alpha);
ScalarField field_rescale(const ScalarField& u, double r, const Vec& x0,
                          double level_factor, double alpha,
                          const GridDomain& target);

// Multilinear interpolation of u at x (x must lie in the box up to slack).
double interpolate(const ScalarField& u, const Vec& x);

}  // namespace conelab

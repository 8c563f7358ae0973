#include "conelab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conelab {

namespace {

// Deterministic sum: sequential within each grid row, pairwise across rows.
double pairwise_combine(std::vector<double>& parts) {
    std::size_t n = parts.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) parts[i] += parts[i + half];
        n = half;
    }
    return n == 0 ? 0.0 : parts[0];
}

template <class PerPoint>
double row_pairwise_sum(const GridDomain& dom, const RegionMask& region, PerPoint&& f) {
    const int rows = dom.dim == 1 ? 1 : dom.n[0];
    const int cols = dom.dim == 1 ? dom.n[0] : dom.n[1];
    std::vector<double> parts(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) {
            const std::size_t idx = dom.dim == 1 ? static_cast<std::size_t>(c) : dom.index(r, c);
            if (region[idx]) acc += f(idx);
        }
        parts[static_cast<std::size_t>(r)] = acc;
    }
    return pairwise_combine(parts);
}

}  // namespace

GridDomain::GridDomain(int dim_, std::array<double, 2> lo_, std::array<double, 2> hi_,
                       std::array<int, 2> n_)
    : dim(dim_), lo(lo_), hi(hi_), n(n_) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("GridDomain: dim must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
        if (!(lo[static_cast<std::size_t>(a)] < hi[static_cast<std::size_t>(a)]))
            throw std::invalid_argument("GridDomain: lo must be < hi");
        if (n[static_cast<std::size_t>(a)] < 5)
            throw std::invalid_argument("GridDomain: need at least 5 points per axis");
    }
    h = (hi[0] - lo[0]) / static_cast<double>(n[0] - 1);
    if (dim == 2) {
        const double h1 = (hi[1] - lo[1]) / static_cast<double>(n[1] - 1);
        if (std::abs(h1 - h) > 1e-12 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("GridDomain: all axes must share the spacing h");
        h = h;  // axis-0 spacing is canonical
    }
    if (!(h > 0.0)) throw std::invalid_argument("GridDomain: spacing must be positive");
}

GridDomain GridDomain::box(int dim, double lo, double hi, int n_per_axis) {
    return GridDomain(dim, {lo, lo}, {hi, hi}, {n_per_axis, n_per_axis});
}

std::size_t GridDomain::nearest_node(const Vec& x) const {
    int ij[2] = {0, 0};
    for (int a = 0; a < dim; ++a) {
        double t = (x[a] - lo[static_cast<std::size_t>(a)]) / h;
        int i = static_cast<int>(std::lround(t));
        i = std::clamp(i, 0, n[static_cast<std::size_t>(a)] - 1);
        ij[a] = i;
    }
    return index(ij[0], ij[1]);
}

double GridDomain::diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double d = hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)];
        s += d * d;
    }
    return std::sqrt(s);
}

bool GridDomain::operator==(const GridDomain& o) const {
    if (dim != o.dim) return false;
    for (int a = 0; a < dim; ++a) {
        if (lo[static_cast<std::size_t>(a)] != o.lo[static_cast<std::size_t>(a)]) return false;
        if (hi[static_cast<std::size_t>(a)] != o.hi[static_cast<std::size_t>(a)]) return false;
        if (n[static_cast<std::size_t>(a)] != o.n[static_cast<std::size_t>(a)]) return false;
    }
    return true;
}

void ScalarField::check_finite(const char* what) const {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double ScalarField::oscillation(const RegionMask* region) const {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (region && !(*region)[i]) continue;
        mn = std::min(mn, v[i]);
        mx = std::max(mx, v[i]);
    }
    if (!(mn <= mx)) return 0.0;
    return mx - mn;
}

std::size_t RegionMask::count() const {
    std::size_t c = 0;
    for (auto b : m) c += b ? 1u : 0u;
    return c;
}

RegionMask RegionMask::full(const GridDomain& d) { return RegionMask(d, true, "full"); }

RegionMask RegionMask::ball(const GridDomain& d, const Vec& center, double radius) {
    RegionMask r(d, false,
                 "ball(r=" + std::to_string(radius) + ")");
    for (std::size_t i = 0; i < r.m.size(); ++i) {
        if ((d.point(i) - center).norm() <= radius) r.m[i] = 1;
    }
    return r;
}

RegionMask RegionMask::interior(const GridDomain& d, int width) {
    RegionMask r(d, false, "interior(w=" + std::to_string(width) + ")");
    for (std::size_t i = 0; i < r.m.size(); ++i) {
        auto [i0, i1] = d.multi_index(i);
        bool in = i0 >= width && i0 < d.n[0] - width;
        if (d.dim == 2) in = in && i1 >= width && i1 < d.n[1] - width;
        r.m[i] = in ? 1 : 0;
    }
    return r;
}

RegionMask RegionMask::intersect(const RegionMask& o) const {
    if (dom != o.dom) throw std::invalid_argument("RegionMask::intersect: domain mismatch");
    RegionMask r(dom, false, descriptor + "&" + o.descriptor);
    for (std::size_t i = 0; i < m.size(); ++i) r.m[i] = (m[i] && o.m[i]) ? 1 : 0;
    return r;
}

RegionMask RegionMask::complement_within(const RegionMask& o) const {
    if (dom != o.dom) throw std::invalid_argument("RegionMask::complement_within: domain mismatch");
    RegionMask r(dom, false, o.descriptor + "\\" + descriptor);
    for (std::size_t i = 0; i < m.size(); ++i) r.m[i] = (o.m[i] && !m[i]) ? 1 : 0;
    return r;
}

bool RegionMask::subset_of(const RegionMask& o) const {
    if (dom != o.dom) throw std::invalid_argument("RegionMask::subset_of: domain mismatch");
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] && !o.m[i]) return false;
    return true;
}

VectorField gradient_central(const ScalarField& u) {
    const GridDomain& d = u.dom;
    for (int a = 0; a < d.dim; ++a)
        if (d.n[static_cast<std::size_t>(a)] < 3)
            throw std::invalid_argument("gradient_central: need at least 3 points per axis");
    VectorField g(d);
    const double inv2h = 1.0 / (2.0 * d.h);
    const double invh = 1.0 / d.h;
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            const std::size_t idx = d.index(i0, i1);
            Vec p(d.dim);
            // axis 0
            if (i0 == 0)
                p[0] = (u.at(1, i1) - u.at(0, i1)) * invh;
            else if (i0 == n0 - 1)
                p[0] = (u.at(n0 - 1, i1) - u.at(n0 - 2, i1)) * invh;
            else
                p[0] = (u.at(i0 + 1, i1) - u.at(i0 - 1, i1)) * inv2h;
            if (d.dim == 2) {
                if (i1 == 0)
                    p[1] = (u.at(i0, 1) - u.at(i0, 0)) * invh;
                else if (i1 == n1 - 1)
                    p[1] = (u.at(i0, n1 - 1) - u.at(i0, n1 - 2)) * invh;
                else
                    p[1] = (u.at(i0, i1 + 1) - u.at(i0, i1 - 1)) * inv2h;
            }
            g.set(idx, p);
        }
    }
    return g;
}

namespace {

// Shifted 3-point second difference, exact on quadratics at every node.
inline double second_diff(const ScalarField& u, int i0, int i1, int axis, double invh2) {
    const GridDomain& d = u.dom;
    const int n = d.n[static_cast<std::size_t>(axis)];
    int i = axis == 0 ? i0 : i1;
    int s = 0;  // stencil shift
    if (i == 0) s = 1;
    if (i == n - 1) s = -1;
    auto val = [&](int off) {
        return axis == 0 ? u.at(i0 + off, i1) : u.at(i0, i1 + off);
    };
    return (val(s - 1) - 2.0 * val(s) + val(s + 1)) * invh2;
}

// First difference in `axis`, central where possible, one-sided at edges.
inline double first_diff(const ScalarField& u, int i0, int i1, int axis, double invh) {
    const GridDomain& d = u.dom;
    const int n = d.n[static_cast<std::size_t>(axis)];
    const int i = axis == 0 ? i0 : i1;
    auto val = [&](int off) {
        return axis == 0 ? u.at(i0 + off, i1) : u.at(i0, i1 + off);
    };
    if (i == 0) return (val(1) - val(0)) * invh;
    if (i == n - 1) return (val(0) - val(-1)) * invh;
    return (val(1) - val(-1)) * (0.5 * invh);
}

}  // namespace

SymMatrixField hessian_central(const ScalarField& u) {
    const GridDomain& d = u.dom;
    for (int a = 0; a < d.dim; ++a)
        if (d.n[static_cast<std::size_t>(a)] < 3)
            throw std::invalid_argument("hessian_central: need at least 3 points per axis");
    SymMatrixField H(d);
    const double invh2 = 1.0 / (d.h * d.h);
    const double invh = 1.0 / d.h;
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            SymMat m(d.dim);
            m(0, 0) = second_diff(u, i0, i1, 0, invh2);
            if (d.dim == 2) {
                m(1, 1) = second_diff(u, i0, i1, 1, invh2);
                // mixed entry: interior 4-point cross, shifted first
                // differences at edges (still exact on quadratics)
                if (i0 > 0 && i0 < n0 - 1 && i1 > 0 && i1 < n1 - 1) {
                    m(0, 1) = (u.at(i0 + 1, i1 + 1) - u.at(i0 + 1, i1 - 1) -
                               u.at(i0 - 1, i1 + 1) + u.at(i0 - 1, i1 - 1)) *
                              (0.25 * invh2);
                } else {
                    // d/dx0 of (du/dx1) with nested shifted stencils
                    const int sa = (i0 == 0) ? 1 : (i0 == n0 - 1 ? -1 : 0);
                    auto dy_at = [&](int off0) {
                        return first_diff(u, i0 + off0, i1, 1, invh);
                    };
                    if (sa == 0)
                        m(0, 1) = (dy_at(1) - dy_at(-1)) * (0.5 * invh);
                    else if (sa == 1)
                        m(0, 1) = (dy_at(1) - dy_at(0)) * invh;
                    else
                        m(0, 1) = (dy_at(0) - dy_at(-1)) * invh;
                }
            }
            H.set(d.index(i0, i1), m);
        }
    }
    return H;
}

double lp_norm(const ScalarField& g, double p, const RegionMask& region) {
    if (g.dom != region.dom) throw std::invalid_argument("lp_norm: domain mismatch");
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    if (region.empty()) throw std::invalid_argument("lp_norm: empty region");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < g.v.size(); ++i)
            if (region[i]) m = std::max(m, std::abs(g.v[i]));
        return m;
    }
    const double hst = std::pow(g.dom.h, g.dom.dim);
    const double s = row_pairwise_sum(g.dom, region, [&](std::size_t i) {
        return std::pow(std::abs(g.v[i]), p);
    });
    return std::pow(hst * s, 1.0 / p);
}

double w1p_seminorm(const VectorField& V, double p, const RegionMask& region) {
    if (V.dom != region.dom) throw std::invalid_argument("w1p_seminorm: domain mismatch");
    if (!(p > 0.0)) throw std::invalid_argument("w1p_seminorm: p must be positive");
    if (region.empty()) throw std::invalid_argument("w1p_seminorm: empty region");
    const GridDomain& d = V.dom;
    const double invh = 1.0 / d.h;
    const double hst = std::pow(d.h, d.dim);
    const double s = row_pairwise_sum(d, region, [&](std::size_t idx) {
        auto [i0, i1] = d.multi_index(idx);
        double fro2 = 0.0;
        for (int a = 0; a < d.dim; ++a) {
            // forward difference, backward at the top edge
            int j0 = i0, j1 = i1, k0 = i0, k1 = i1;
            const int ia = a == 0 ? i0 : i1;
            if (ia < d.n[static_cast<std::size_t>(a)] - 1) {
                (a == 0 ? j0 : j1) += 1;
            } else {
                (a == 0 ? k0 : k1) -= 1;
            }
            const Vec dv = V.get(d.index(j0, j1)) - V.get(d.index(k0, k1));
            for (int c = 0; c < d.dim; ++c) {
                const double e = dv[c] * invh;
                fro2 += e * e;
            }
        }
        return std::pow(fro2, 0.5 * p);
    });
    return std::pow(hst * s, 1.0 / p);
}

double measure(const RegionMask& mask) {
    return std::pow(mask.dom.h, mask.dom.dim) * static_cast<double>(mask.count());
}

DyadicSum dyadic_lp_sum(const ScalarField& g, double eta, double M, double p,
                        const RegionMask& region) {
    if (g.dom != region.dom) throw std::invalid_argument("dyadic_lp_sum: domain mismatch");
    if (!(eta > 0.0) || !(M > 1.0) || !(p > 0.0))
        throw std::invalid_argument("dyadic_lp_sum: need eta>0, M>1, p>0");
    for (std::size_t i = 0; i < g.v.size(); ++i)
        if (region[i] && g.v[i] < 0.0)
            throw std::invalid_argument("dyadic_lp_sum: g must be nonnegative on region");
    const double hst = std::pow(g.dom.h, g.dom.dim);
    DyadicSum out;
    double Mk = 1.0;
    for (int k = 1; k < 4096; ++k) {
        Mk *= M;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < g.v.size(); ++i)
            if (region[i] && g.v[i] > eta * Mk) ++cnt;
        if (cnt == 0) break;
        out.S += std::pow(Mk, p) * (hst * static_cast<double>(cnt));
        out.k_max_used = k;
    }
    return out;
}

double interpolate(const ScalarField& u, const Vec& x) {
    const GridDomain& d = u.dom;
    const double slack = 1e-9 * d.h;
    if (!d.contains(x, slack))
        throw std::invalid_argument("interpolate: point outside the source domain");
    int idx[2] = {0, 0};
    double t[2] = {0.0, 0.0};
    for (int a = 0; a < d.dim; ++a) {
        double s = (x[a] - d.lo[static_cast<std::size_t>(a)]) / d.h;
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, d.n[static_cast<std::size_t>(a)] - 2);
        idx[a] = i;
        t[a] = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
    }
    if (d.dim == 1) {
        return (1.0 - t[0]) * u.at(idx[0]) + t[0] * u.at(idx[0] + 1);
    }
    const double v00 = u.at(idx[0], idx[1]);
    const double v01 = u.at(idx[0], idx[1] + 1);
    const double v10 = u.at(idx[0] + 1, idx[1]);
    const double v11 = u.at(idx[0] + 1, idx[1] + 1);
    return (1.0 - t[0]) * ((1.0 - t[1]) * v00 + t[1] * v01) +
           t[0] * ((1.0 - t[1]) * v10 + t[1] * v11);
}

ScalarField field_rescale(const ScalarField& u, double r, const Vec& x0,
                          double level_factor, double alpha) {
    const GridDomain& d = u.dom;
    std::array<double, 2> lo{}, hi{};
    for (int a = 0; a < d.dim; ++a) {
        lo[static_cast<std::size_t>(a)] = (d.lo[static_cast<std::size_t>(a)] - x0[a]) / r;
        hi[static_cast<std::size_t>(a)] = (d.hi[static_cast<std::size_t>(a)] - x0[a]) / r;
    }
    return field_rescale(u, r, x0, level_factor, alpha, GridDomain(d.dim, lo, hi, d.n));
}

ScalarField field_rescale(const ScalarField& u, double r, const Vec& x0,
                          double level_factor, double alpha,
                          const GridDomain& target) {
    if (!(r > 0.0)) throw std::invalid_argument("field_rescale: r must be positive");
    if (!(level_factor > 0.0))
        throw std::invalid_argument("field_rescale: level_factor must be positive");
    const double scale = 1.0 / (std::pow(r, 1.0 + alpha) * level_factor);
    ScalarField out(target);
    const bool identity = r == 1.0 && level_factor == 1.0 && target == u.dom;
    bool shift_zero = true;
    for (int a = 0; a < target.dim; ++a) shift_zero = shift_zero && x0[a] == 0.0;
    if (identity && shift_zero) {
        out.v = u.v;  // exact at nodes
        return out;
    }
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        Vec y = target.point(i);
        Vec x(target.dim);
        for (int a = 0; a < target.dim; ++a) x[a] = r * y[a] + x0[a];
        out.v[i] = interpolate(u, x) * scale;
    }
    return out;
}

}  // namespace conelab

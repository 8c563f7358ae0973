#include "conelab/cones.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "conelab/operators.hpp"

namespace conelab {

double Cone::value(const Vec& x) const {
    const double s = sign == ConeSign::concave ? -1.0 : 1.0;
    return s * (opening / (1.0 + alpha)) * std::pow((x - vertex).norm(), 1.0 + alpha) + offset;
}

ConeJet cone_jet(const Cone& c, const Vec& x) {
    ConeJet jet;
    const Vec d = x - c.vertex;
    const double r = d.norm();
    const double s = c.sign == ConeSign::concave ? -1.0 : 1.0;
    if (r == 0.0) {
        jet.value = c.offset;
        jet.at_vertex = true;
        jet.grad = Vec(x.dim);
        jet.hess_bounded = c.alpha == 1.0;
        if (jet.hess_bounded) jet.hess = SymMat::identity(x.dim) * (s * c.opening);
        else jet.hess = SymMat(x.dim);
        return jet;
    }
    jet.value = s * (c.opening / (1.0 + c.alpha)) * std::pow(r, 1.0 + c.alpha);
    jet.value += c.offset;
    const Vec rh = d * (1.0 / r);
    jet.grad = rh * (s * c.opening * std::pow(r, c.alpha));
    // D^2P = +-K r^(alpha-1) (I + (alpha-1) rh (x) rh); radial eigenvalue
    // alpha * K r^(alpha-1), tangential K r^(alpha-1).
    const double scale = s * c.opening * std::pow(r, c.alpha - 1.0);
    jet.hess = (SymMat::identity(x.dim) + SymMat::outer(rh) * (c.alpha - 1.0)) * scale;
    return jet;
}

Cone cone_scale(const Cone& c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("cone_scale: r must be positive");
    if (r == 1.0) return c;
    Cone out = c;
    out.vertex = c.vertex * (1.0 / r);
    out.offset = c.offset / std::pow(r, 1.0 + c.alpha);
    return out;
}

Vec cone_diff_vertex(double opening_hi, const Vec& vertex_hi, double opening_lo,
                     const Vec& vertex_lo, double alpha) {
    if (!(opening_hi > opening_lo) || !(opening_lo > 0.0))
        throw std::invalid_argument(
            "cone_diff_vertex: need opening_hi > opening_lo > 0 for a unique critical point");
    const double m = std::pow(opening_hi / opening_lo, 1.0 / alpha);
    Vec y0(vertex_hi.dim);
    for (int a = 0; a < y0.dim; ++a)
        y0[a] = (m * vertex_hi[a] - vertex_lo[a]) / (m - 1.0);
    return y0;
}

MaxPrincipleReport cone_diff_max_principle(double opening_hi, const Vec& vertex_hi,
                                           double opening_lo, const Vec& vertex_lo,
                                           double alpha, double region_radius,
                                           int pts_per_axis) {
    if (!(opening_hi > opening_lo))
        throw std::invalid_argument("cone_diff_max_principle: premise needs opening_hi > opening_lo");
    const Vec y0 = cone_diff_vertex(opening_hi, vertex_hi, opening_lo, vertex_lo, alpha);
    return cone_diff_max_principle(opening_hi, vertex_hi, opening_lo, vertex_lo, alpha,
                                   region_radius, y0, pts_per_axis);
}

MaxPrincipleReport cone_diff_max_principle(double opening_hi, const Vec& vertex_hi,
                                           double opening_lo, const Vec& vertex_lo,
                                           double alpha, double region_radius,
                                           const Vec& region_center, int pts_per_axis) {
    if (!(opening_hi > opening_lo))
        throw std::invalid_argument("cone_diff_max_principle: premise needs opening_hi > opening_lo");
    if (!(region_radius > 0.0))
        throw std::invalid_argument("cone_diff_max_principle: region radius must be positive");
    const Vec y0 = cone_diff_vertex(opening_hi, vertex_hi, opening_lo, vertex_lo, alpha);
    if ((y0 - region_center).norm() >= region_radius)
        throw std::invalid_argument(
            "cone_diff_max_principle: the difference vertex must lie inside the region");

    Cone hi{ConeSign::concave, opening_hi, vertex_hi, 0.0, alpha};
    Cone lo{ConeSign::concave, opening_lo, vertex_lo, 0.0, alpha};
    auto Q = [&](const Vec& x) { return hi.value(x) - lo.value(x); };

    const int n = pts_per_axis;
    const double half = 4.0 * region_radius;
    const double hgrid = 2.0 * half / static_cast<double>(n - 1);
    const double shell = 1.5 * hgrid;

    double max_outside = -std::numeric_limits<double>::infinity();
    double max_boundary = -std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    const int dim = region_center.dim;
    const int n1 = dim == 2 ? n : 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n1; ++j) {
            Vec x(dim);
            x[0] = region_center[0] - half + hgrid * i;
            if (dim == 2) x[1] = region_center[1] - half + hgrid * j;
            const double rr = (x - region_center).norm();
            const double q = Q(x);
            max_abs = std::max(max_abs, std::abs(q));
            if (rr > region_radius) {
                max_outside = std::max(max_outside, q);
                if (rr <= region_radius + shell) max_boundary = std::max(max_boundary, q);
            }
        }
    }
    MaxPrincipleReport rep;
    rep.tol = 1e-9 * (1.0 + max_abs);
    rep.max_outside = max_outside;
    rep.max_boundary = max_boundary;
    rep.holds = max_outside <= max_boundary + rep.tol;
    return rep;
}

double touch_tolerance(double K, double h, double alpha) {
    return 4.0 * K * std::pow(h, 1.0 + alpha);
}

std::optional<Cone> tangent_cone_at(const ScalarField& u, std::size_t x0, double K,
                                    Side side, double gamma,
                                    const RegionMask& search_region) {
    if (!(K > 0.0)) throw std::invalid_argument("tangent_cone_at: K must be positive");
    if (u.dom != search_region.dom)
        throw std::invalid_argument("tangent_cone_at: domain mismatch");
    const GridDomain& d = u.dom;
    const double alpha = 1.0 / (1.0 + gamma);

    const VectorField g = gradient_central(u);
    const Vec Du = g.get(x0);
    const Vec V = stress(Du, gamma);
    const double s = side == Side::below ? 1.0 : -1.0;
    const Vec x = d.point(x0);
    Vec vertex = x + V * (s * std::pow(K, -(1.0 + gamma)));
    if (!d.contains(vertex, 1e-12 * d.h))
        throw std::invalid_argument("tangent_cone_at: vertex outside the domain box");

    Cone c;
    c.sign = side == Side::below ? ConeSign::concave : ConeSign::convex;
    c.opening = K;
    c.alpha = alpha;
    c.vertex = vertex;
    // offset so the cone passes through (x0, u(x0))
    const double ss = c.sign == ConeSign::concave ? -1.0 : 1.0;
    c.offset = u[x0] - ss * (K / (1.0 + alpha)) * std::pow((x - vertex).norm(), 1.0 + alpha);

    const double tol = touch_tolerance(K, d.h, alpha);
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        if (!search_region[i]) continue;
        const double pv = c.value(d.point(i));
        if (side == Side::below) {
            if (pv > u.v[i] + tol) return std::nullopt;
        } else {
            if (pv < u.v[i] - tol) return std::nullopt;
        }
    }
    return c;
}

}  // namespace conelab

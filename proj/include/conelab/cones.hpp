#pragma once

#include <optional>

#include "conelab/field.hpp"
#include "conelab/geometry.hpp"

namespace conelab {

enum class ConeSign { concave, convex };

// P(x) = -+ (K/(1+alpha)) |x - vertex|^(1+alpha) + offset.
// Concave carries the minus sign (the cone sliding from below).
struct Cone {
    ConeSign sign = ConeSign::concave;
    double opening = 1.0;  // K > 0
    Vec vertex;
    double offset = 0.0;   // additive constant; value at the vertex
    double alpha = 1.0;    // in (0, 1]

    double value(const Vec& x) const;
};

struct ConeJet {
    double value = 0.0;
    bool at_vertex = false;     // grad/hess carry no information at the vertex
    Vec grad;                   // limit 0 at the vertex
    bool hess_bounded = true;   // false at the vertex when alpha < 1
    SymMat hess;
};

// Closed-form value/gradient/Hessian of a cone at x. At the vertex the
// value is the offset, the gradient limit is zero and the Hessian is
// unbounded for alpha < 1 (exact matrix for alpha = 1).
ConeJet cone_jet(const Cone& c, const Vec& x);

// P(r x) / r^(1+alpha): opening unchanged, vertex /r, offset /r^(1+alpha).
Cone cone_scale(const Cone& c, double r);

// Unique critical point of Q = P_hi - P_lo for two same-sign cones with
// opening_hi > opening_lo:
//   y0 = (m vertex_hi - vertex_lo) / (m - 1),  m = (opening_hi/opening_lo)^(1/alpha).
Vec cone_diff_vertex(double opening_hi, const Vec& vertex_hi, double opening_lo,
                     const Vec& vertex_lo, double alpha);

struct MaxPrincipleReport {
    bool holds = false;
    double max_outside = 0.0;
    double max_boundary = 0.0;
    double tol = 0.0;
};

// Checks max_{outside region} Q = max_{boundary of region} Q for the
// concave cone difference Q = P_hi - P_lo, sampled on a box four times
// the region. The region is the closed ball of the given radius around
// region_center (the difference vertex when omitted); the vertex must lie
// in the region's interior.
MaxPrincipleReport cone_diff_max_principle(double opening_hi, const Vec& vertex_hi,
                                           double opening_lo, const Vec& vertex_lo,
                                           double alpha, double region_radius,
                                           int pts_per_axis = 129);
MaxPrincipleReport cone_diff_max_principle(double opening_hi, const Vec& vertex_hi,
                                           double opening_lo, const Vec& vertex_lo,
                                           double alpha, double region_radius,
                                           const Vec& region_center, int pts_per_axis = 129);

enum class Side { below, above };

// Constructs the sign-appropriate cone of opening K matching u's value and
// discrete gradient at x0 (vertex x0 +- K^-(1+gamma) V(Du)), then verifies
// global touching over the search region within tol_touch. Returns nothing
// if the cone fails to touch; throws if the vertex leaves the domain box.
std::optional<Cone> tangent_cone_at(const ScalarField& u, std::size_t x0, double K,
                                    Side side, double gamma,
                                    const RegionMask& search_region);

// Discrete contact tolerance; see the contact module for the convention.
double touch_tolerance(double K, double h, double alpha);

}  // namespace conelab

#pragma once

#include <cstdint>
#include <vector>

#include "conelab/cones.hpp"
#include "conelab/field.hpp"

namespace conelab {

// One slid cone: vertex node, the offset c(y) at first touch, and the
// argmin set {x : u(x) + (K/(1+a))|x-y|^(1+a) <= c(y) + tol_touch},
// indices ascending.
struct VertexRecord {
    std::uint32_t vertex = 0;
    double slide_constant = 0.0;
    std::vector<std::uint32_t> touches;
};

struct ContactSet {
    Side side = Side::below;
    double opening = 1.0;
    double alpha = 1.0;
    double tol_touch = 0.0;
    RegionMask vertices;
    RegionMask touch;
    std::vector<VertexRecord> records;
};

enum class SlideStrategy {
    reference,  // plain definition scan over the whole search region
    blocked     // tile-pruned scan; must agree with reference bitwise
};

// Slides cones of opening K with vertices in V until first touch with u
// over the search region. side == below slides concave cones from below;
// side == above is computed as the below-transform of -u (masks equal by
// construction, slide constants negated back).
ContactSet slide_transform(const ScalarField& u, const RegionMask& V, double K,
                           Side side, double alpha, const RegionMask& search,
                           SlideStrategy strategy = SlideStrategy::blocked,
                           int threads = 1);

struct TouchingSets {
    RegionMask T_minus;
    RegionMask T_plus;
    RegionMask T;  // intersection
};

TouchingSets touching_sets(const ScalarField& u, const RegionMask& V, double K,
                           double gamma, const RegionMask& search, int threads = 1);

// Minimal dyadic opening K*(x) over levels K_min M^k, k = 0..k_max, and
// g = (1/2) K*^(1/(1+gamma)). Censored where no level <= k_max touches.
struct OpeningField {
    GridDomain dom;
    double K_min = 0.25;
    double M = 2.0;
    int k_max = 16;
    std::vector<double> k_star;         // opening value; meaningless when censored
    std::vector<std::uint8_t> censored;
    std::vector<double> g;
    RegionMask evaluated;               // where the field was computed (search)

    double censored_fraction(const RegionMask& within) const;
};

OpeningField opening_function(const ScalarField& u, const RegionMask& V, double gamma,
                              double K_min, double M, int k_max,
                              const RegionMask& search, int threads = 1);

// Measures m_k = |B1 \ T_{M^k}| on cumulative (union-nested) touch masks
// and fits sigma = -slope of log m_k vs log t_k above the noise floor.
struct DecayCurve {
    double M = 2.0;
    int k_max = 8;
    std::vector<double> t;              // t_k = M^k
    std::vector<double> m;              // measures
    std::vector<std::uint8_t> in_fit_window;
    double sigma = 0.0;
    bool sigma_infinite = false;        // all levels beyond k=0 below the floor
    bool fit_defined = false;           // at least two levels above the floor
    double residual = 0.0;              // RMS residual of the log-log fit
    double noise_floor = 0.0;           // 5 h^dim
};

DecayCurve decay_curve(const ScalarField& u, double gamma, double M, int k_max,
                       const RegionMask& B1, const RegionMask& V, int threads = 1);

// Vertex map y = x + K^-(1+gamma) V(Du(x)) on the touch set of a below
// contact set, with area-formula bookkeeping.
struct VertexMapResult {
    std::vector<std::uint32_t> touch_idx;
    std::vector<Vec> mapped_vertex;
    std::vector<double> jacobian_det;
    double measure_ratio = 0.0;         // measure(V-hit) / measure(touch)
    double grad_floor = 0.0;
};

VertexMapResult vertex_map(const ScalarField& u, const ContactSet& contact, double gamma);

// u_eps(x0) = min_x (u(x) + |x-x0|^2/eps), exact discrete infimum.
ScalarField inf_convolution(const ScalarField& u, double eps);
// -inf_convolution(-u, eps)
ScalarField sup_convolution(const ScalarField& u, double eps);

// Hardy-Littlewood maximal function over the supplied radii: the numerator
// integrates |g| over B_r(x) intersected with the region, the denominator
// is the full continuum ball volume.
ScalarField maximal_function(const ScalarField& g, const RegionMask& region,
                             const std::vector<double>& radii);

// Default radius ladder {2h, 4h, 8h, ...} capped by the domain diameter.
std::vector<double> default_maximal_radii(const GridDomain& dom);

// Pointwise C^(1,alpha) seminorm upper bound: best affine sup-norm fit per
// window (least squares + gradient pattern refinement), maxed over radii.
struct SeminormField {
    ScalarField value;
    RegionMask flagged;  // points where every window exits the domain
};

SeminormField seminorm_field(const ScalarField& u, double alpha,
                             const std::vector<double>& radii,
                             const RegionMask& region);

// Discrete Chebyshev residual of the best affine fit for a fixed gradient:
// half the range of u - b.(x - x0) over the window. Shared by the
// production path and test oracles.
double affine_halfrange(const ScalarField& u, const std::vector<std::uint32_t>& window,
                        const Vec& x0, const Vec& b);

}  // namespace conelab

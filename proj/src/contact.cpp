#include "conelab/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "conelab/operators.hpp"
#include "conelab/parallel.hpp"

namespace conelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Increasing radial kernel rho(|x-y|) evaluated on integer squared
// distances d2 = di^2 + dj^2. A lookup table is built when small enough;
// both code paths evaluate the same expression, so table and direct are
// bitwise identical.
struct RadialKernel {
    double h2 = 0.0;
    double coef = 0.0;   // multiplies pow(h2*d2, expo)
    double expo = 1.0;
    std::vector<double> tab;

    static constexpr std::size_t kMaxTable = std::size_t(1) << 22;

    RadialKernel(const GridDomain& d, double coef_, double expo_)
        : h2(d.h * d.h), coef(coef_), expo(expo_) {
        std::size_t maxd2 = 0;
        for (int a = 0; a < d.dim; ++a) {
            const std::size_t s = static_cast<std::size_t>(d.n[static_cast<std::size_t>(a)] - 1);
            maxd2 += s * s;
        }
        if (maxd2 + 1 <= kMaxTable) {
            tab.resize(maxd2 + 1);
            for (std::size_t k = 0; k <= maxd2; ++k) tab[k] = eval(k);
        }
    }

    double eval(std::size_t d2) const {
        if (d2 == 0) return 0.0;
        return coef * std::pow(h2 * static_cast<double>(d2), expo);
    }
    double operator()(std::size_t d2) const {
        return tab.empty() ? eval(d2) : tab[d2];
    }
};

struct TileIndex {
    static constexpr int kTile = 8;
    int nt0 = 0, nt1 = 0;
    std::vector<double> min_u;  // per tile, over search region; +inf if empty

    TileIndex(const ScalarField& u, const RegionMask& search) {
        const GridDomain& d = u.dom;
        const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
        nt0 = (n0 + kTile - 1) / kTile;
        nt1 = (n1 + kTile - 1) / kTile;
        min_u.assign(static_cast<std::size_t>(nt0) * static_cast<std::size_t>(nt1), kInf);
        for (int i0 = 0; i0 < n0; ++i0)
            for (int i1 = 0; i1 < n1; ++i1) {
                const std::size_t idx = d.index(i0, i1);
                if (!search[idx]) continue;
                double& slot = min_u[static_cast<std::size_t>(i0 / kTile) * static_cast<std::size_t>(nt1) +
                                     static_cast<std::size_t>(i1 / kTile)];
                slot = std::min(slot, u.v[idx]);
            }
    }
};

// Squared integer distance from point (i0,i1) to the index rectangle
// [a0,b0] x [a1,b1].
inline std::size_t rect_d2(int i0, int i1, int a0, int b0, int a1, int b1) {
    long d0 = 0, d1 = 0;
    if (i0 < a0) d0 = a0 - i0;
    else if (i0 > b0) d0 = i0 - b0;
    if (i1 < a1) d1 = a1 - i1;
    else if (i1 > b1) d1 = i1 - b1;
    return static_cast<std::size_t>(d0 * d0 + d1 * d1);
}

struct TransformCore {
    const ScalarField& u;
    const RegionMask& search;
    const RadialKernel& ker;
    const TileIndex& tiles;
    double global_min_u;
    int n0, n1;

    TransformCore(const ScalarField& u_, const RegionMask& search_, const RadialKernel& k_,
                  const TileIndex& t_)
        : u(u_), search(search_), ker(k_), tiles(t_) {
        n0 = u.dom.n[0];
        n1 = u.dom.dim == 2 ? u.dom.n[1] : 1;
        global_min_u = kInf;
        for (double m : tiles.min_u) global_min_u = std::min(global_min_u, m);
    }

    double scan_tile_min(int i0, int i1, int t0, int t1, double best) const {
        const int T = TileIndex::kTile;
        const int a0 = t0 * T, b0 = std::min(n0, a0 + T);
        const int a1 = t1 * T, b1 = std::min(n1, a1 + T);
        for (int r0 = a0; r0 < b0; ++r0) {
            const long dr0 = r0 - i0;
            const std::size_t d0sq = static_cast<std::size_t>(dr0 * dr0);
            const std::size_t base = u.dom.index(r0, a1);
            for (int r1 = a1; r1 < b1; ++r1) {
                const std::size_t idx = base + static_cast<std::size_t>(r1 - a1);
                if (!search[idx]) continue;
                const long dr1 = r1 - i1;
                const double w = u.v[idx] + ker(d0sq + static_cast<std::size_t>(dr1 * dr1));
                if (w < best) best = w;
            }
        }
        return best;
    }

    void scan_tile_collect(int i0, int i1, int t0, int t1, double threshold,
                           std::vector<std::uint32_t>& out) const {
        const int T = TileIndex::kTile;
        const int a0 = t0 * T, b0 = std::min(n0, a0 + T);
        const int a1 = t1 * T, b1 = std::min(n1, a1 + T);
        for (int r0 = a0; r0 < b0; ++r0) {
            const long dr0 = r0 - i0;
            const std::size_t d0sq = static_cast<std::size_t>(dr0 * dr0);
            const std::size_t base = u.dom.index(r0, a1);
            for (int r1 = a1; r1 < b1; ++r1) {
                const std::size_t idx = base + static_cast<std::size_t>(r1 - a1);
                if (!search[idx]) continue;
                const long dr1 = r1 - i1;
                const double w = u.v[idx] + ker(d0sq + static_cast<std::size_t>(dr1 * dr1));
                if (w <= threshold) out.push_back(static_cast<std::uint32_t>(idx));
            }
        }
    }

    // Ring walk around the vertex tile; prune rings once even the closest
    // remaining cell cannot beat the running bound.
    template <class TileVisitor>
    void walk_tiles(int i0, int i1, double (*bound_of)(const TransformCore&, double),
                    double& state, TileVisitor&& visit) const {
        const int T = TileIndex::kTile;
        const int b0 = i0 / T, b1 = i1 / T;
        const int max_ring = std::max(std::max(b0, tiles.nt0 - 1 - b0),
                                      std::max(b1, tiles.nt1 - 1 - b1));
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (ring >= 2) {
                const long dmin = static_cast<long>(ring - 1) * T + 1;
                const double lb = global_min_u + ker(static_cast<std::size_t>(dmin * dmin));
                if (lb > bound_of(*this, state)) break;
            }
            const int t0lo = b0 - ring, t0hi = b0 + ring;
            const int t1lo = b1 - ring, t1hi = b1 + ring;
            for (int t0 = std::max(0, t0lo); t0 <= std::min(tiles.nt0 - 1, t0hi); ++t0) {
                const bool edge0 = (t0 == t0lo || t0 == t0hi);
                for (int t1 = std::max(0, t1lo); t1 <= std::min(tiles.nt1 - 1, t1hi); ++t1) {
                    if (!edge0 && t1 != t1lo && t1 != t1hi) continue;  // interior of ring
                    const double tmin = tiles.min_u[static_cast<std::size_t>(t0) * static_cast<std::size_t>(tiles.nt1) +
                                                    static_cast<std::size_t>(t1)];
                    if (tmin == kInf) continue;
                    const std::size_t d2 = rect_d2(i0, i1, t0 * T, std::min(n0, t0 * T + T) - 1,
                                                   t1 * T, std::min(n1, t1 * T + T) - 1);
                    if (tmin + ker(d2) > bound_of(*this, state)) continue;
                    visit(t0, t1);
                }
            }
        }
    }

    // Exact minimum of w_y over the search region (blocked path).
    double min_blocked(int i0, int i1, double init) const {
        double best = init;
        walk_tiles(
            i0, i1, [](const TransformCore&, double s) { return s; }, best,
            [&](int t0, int t1) { best = scan_tile_min(i0, i1, t0, t1, best); });
        return best;
    }

    void collect_blocked(int i0, int i1, double threshold,
                         std::vector<std::uint32_t>& out) const {
        double state = threshold;
        walk_tiles(
            i0, i1, [](const TransformCore&, double s) { return s; }, state,
            [&](int t0, int t1) { scan_tile_collect(i0, i1, t0, t1, threshold, out); });
        std::sort(out.begin(), out.end());
    }

    double min_reference(int i0, int i1) const {
        double best = kInf;
        for (int r0 = 0; r0 < n0; ++r0) {
            const long dr0 = r0 - i0;
            const std::size_t d0sq = static_cast<std::size_t>(dr0 * dr0);
            for (int r1 = 0; r1 < n1; ++r1) {
                const std::size_t idx = u.dom.index(r0, r1);
                if (!search[idx]) continue;
                const long dr1 = r1 - i1;
                const double w = u.v[idx] + ker(d0sq + static_cast<std::size_t>(dr1 * dr1));
                if (w < best) best = w;
            }
        }
        return best;
    }

    void collect_reference(int i0, int i1, double threshold,
                           std::vector<std::uint32_t>& out) const {
        for (int r0 = 0; r0 < n0; ++r0) {
            const long dr0 = r0 - i0;
            const std::size_t d0sq = static_cast<std::size_t>(dr0 * dr0);
            for (int r1 = 0; r1 < n1; ++r1) {
                const std::size_t idx = u.dom.index(r0, r1);
                if (!search[idx]) continue;
                const long dr1 = r1 - i1;
                const double w = u.v[idx] + ker(d0sq + static_cast<std::size_t>(dr1 * dr1));
                if (w <= threshold) out.push_back(static_cast<std::uint32_t>(idx));
            }
        }
    }
};

std::vector<std::uint32_t> mask_indices(const RegionMask& m) {
    std::vector<std::uint32_t> out;
    out.reserve(m.count());
    for (std::size_t i = 0; i < m.m.size(); ++i)
        if (m.m[i]) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

ContactSet slide_below(const ScalarField& u, const RegionMask& V, double K, double alpha,
                       const RegionMask& search, SlideStrategy strategy, int threads) {
    const GridDomain& d = u.dom;
    ContactSet cs;
    cs.side = Side::below;
    cs.opening = K;
    cs.alpha = alpha;
    cs.tol_touch = touch_tolerance(K, d.h, alpha);
    cs.vertices = V;
    cs.touch = RegionMask(d, false, "touch");

    const RadialKernel ker(d, K / (1.0 + alpha), 0.5 * (1.0 + alpha));
    const TileIndex tiles(u, search);
    const TransformCore core(u, search, ker, tiles);

    const auto verts = mask_indices(V);
    cs.records.resize(verts.size());

    parallel_blocks(verts.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const std::size_t yi = verts[k];
            auto [i0, i1] = d.multi_index(yi);
            VertexRecord rec;
            rec.vertex = verts[k];
            // y is in the search region (V is a subset), so u(y) is a
            // valid starting candidate for the minimum.
            double c;
            if (strategy == SlideStrategy::blocked)
                c = core.min_blocked(i0, i1, u.v[yi]);
            else
                c = core.min_reference(i0, i1);
            rec.slide_constant = c;
            if (strategy == SlideStrategy::blocked)
                core.collect_blocked(i0, i1, c + cs.tol_touch, rec.touches);
            else
                core.collect_reference(i0, i1, c + cs.tol_touch, rec.touches);
            cs.records[k] = std::move(rec);
        }
    });

    for (const auto& rec : cs.records)
        for (auto t : rec.touches) cs.touch.m[t] = 1;
    return cs;
}

}  // namespace

ContactSet slide_transform(const ScalarField& u, const RegionMask& V, double K, Side side,
                           double alpha, const RegionMask& search, SlideStrategy strategy,
                           int threads) {
    if (!(K > 0.0)) throw std::invalid_argument("slide_transform: K must be positive");
    if (u.dom != V.dom || u.dom != search.dom)
        throw std::invalid_argument("slide_transform: domain mismatch");
    if (V.empty()) throw std::invalid_argument("slide_transform: empty vertex set");
    if (!V.subset_of(search))
        throw std::invalid_argument("slide_transform: vertex set must lie in the search region");
    if (side == Side::below) return slide_below(u, V, K, alpha, search, strategy, threads);
    // T+_K(u, V) = T-_K(-u, V); report the natural above-side constants.
    ScalarField neg = u;
    for (double& x : neg.v) x = -x;
    ContactSet cs = slide_below(neg, V, K, alpha, search, strategy, threads);
    cs.side = Side::above;
    for (auto& rec : cs.records) rec.slide_constant = -rec.slide_constant;
    return cs;
}

TouchingSets touching_sets(const ScalarField& u, const RegionMask& V, double K,
                           double gamma, const RegionMask& search, int threads) {
    const double alpha = 1.0 / (1.0 + gamma);
    TouchingSets out;
    out.T_minus = slide_transform(u, V, K, Side::below, alpha, search,
                                  SlideStrategy::blocked, threads)
                      .touch;
    out.T_plus = slide_transform(u, V, K, Side::above, alpha, search,
                                 SlideStrategy::blocked, threads)
                     .touch;
    out.T = out.T_minus.intersect(out.T_plus);
    out.T.descriptor = "T";
    return out;
}

double OpeningField::censored_fraction(const RegionMask& within) const {
    std::size_t total = 0, cens = 0;
    for (std::size_t i = 0; i < censored.size(); ++i) {
        if (!within[i] || !evaluated[i]) continue;
        ++total;
        if (censored[i]) ++cens;
    }
    return total == 0 ? 0.0 : static_cast<double>(cens) / static_cast<double>(total);
}

OpeningField opening_function(const ScalarField& u, const RegionMask& V, double gamma,
                              double K_min, double M, int k_max, const RegionMask& search,
                              int threads) {
    if (!(K_min > 0.0) || !(M > 1.0) || k_max < 1)
        throw std::invalid_argument("opening_function: need K_min > 0, M > 1, k_max >= 1");
    OpeningField of;
    of.dom = u.dom;
    of.K_min = K_min;
    of.M = M;
    of.k_max = k_max;
    of.evaluated = search;
    const std::size_t N = u.dom.size();
    of.k_star.assign(N, 0.0);
    of.censored.assign(N, 1);
    of.g.assign(N, 0.0);

    std::vector<std::uint8_t> done(N, 0);
    std::size_t remaining = search.count();
    double K = K_min;
    for (int k = 0; k <= k_max && remaining > 0; ++k, K *= M) {
        TouchingSets ts = touching_sets(u, V, K, gamma, search, threads);
        for (std::size_t i = 0; i < N; ++i) {
            if (!search[i] || done[i]) continue;
            if (ts.T[i]) {
                done[i] = 1;
                of.censored[i] = 0;
                of.k_star[i] = K;
                of.g[i] = 0.5 * std::pow(K, 1.0 / (1.0 + gamma));
                --remaining;
            }
        }
    }
    return of;
}

DecayCurve decay_curve(const ScalarField& u, double gamma, double M, int k_max,
                       const RegionMask& B1, const RegionMask& V, int threads) {
    if (!(M > 1.0) || k_max < 1)
        throw std::invalid_argument("decay_curve: need M > 1 and k_max >= 1");
    if (u.dom != B1.dom || u.dom != V.dom)
        throw std::invalid_argument("decay_curve: domain mismatch");
    const GridDomain& d = u.dom;
    const RegionMask search = RegionMask::full(d);

    DecayCurve dc;
    dc.M = M;
    dc.k_max = k_max;
    dc.noise_floor = 5.0 * std::pow(d.h, d.dim);

    // Touch masks accumulate across levels: the continuum sets are nested
    // (T_t grows with t), and the union enforces that identity on the grid.
    RegionMask cum(d, false, "T_cum");
    double t = 1.0;
    bool exhausted = false;
    for (int k = 0; k <= k_max; ++k, t *= M) {
        if (!exhausted) {
            TouchingSets ts = touching_sets(u, V, t, gamma, search, threads);
            for (std::size_t i = 0; i < cum.m.size(); ++i)
                if (ts.T[i]) cum.m[i] = 1;
        }
        const double mk = measure(cum.complement_within(B1));
        dc.t.push_back(t);
        dc.m.push_back(mk);
        if (mk == 0.0) exhausted = true;  // nested masks cannot shrink
    }

    // Fit sigma over levels above the noise floor.
    dc.in_fit_window.assign(dc.m.size(), 0);
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < dc.m.size(); ++k) {
        if (dc.m[k] > dc.noise_floor) {
            dc.in_fit_window[k] = 1;
            lx.push_back(std::log(dc.t[k]));
            ly.push_back(std::log(dc.m[k]));
        }
    }
    bool beyond0 = false;
    for (std::size_t k = 1; k < dc.m.size(); ++k)
        if (dc.m[k] > dc.noise_floor) beyond0 = true;
    dc.sigma_infinite = !beyond0;
    if (lx.size() >= 2) {
        dc.fit_defined = true;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double denom = n * sxx - sx * sx;
        if (denom > 0.0) {
            const double slope = (n * sxy - sx * sy) / denom;
            const double inter = (sy - slope * sx) / n;
            dc.sigma = -slope;
            double rss = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                const double r = ly[i] - (inter + slope * lx[i]);
                rss += r * r;
            }
            dc.residual = std::sqrt(rss / n);
        } else {
            dc.fit_defined = false;  // all points at one threshold
        }
    }
    return dc;
}

VertexMapResult vertex_map(const ScalarField& u, const ContactSet& contact, double gamma) {
    if (contact.side != Side::below)
        throw std::invalid_argument("vertex_map: contact set must be computed with side = below");
    if (contact.touch.count() == 0)
        throw std::invalid_argument("vertex_map: empty touch set");
    const GridDomain& d = u.dom;
    const double alpha = 1.0 / (1.0 + gamma);
    VertexMapResult out;
    out.grad_floor = 10.0 * std::pow(d.h, alpha);

    const VectorField g = gradient_central(u);
    const SymMatrixField H = hessian_central(u);
    const double Kpow = std::pow(contact.opening, -(1.0 + gamma));

    for (std::size_t i = 0; i < contact.touch.m.size(); ++i) {
        if (!contact.touch[i]) continue;
        out.touch_idx.push_back(static_cast<std::uint32_t>(i));
        const Vec p = g.get(i);
        const Vec x = d.point(i);
        out.mapped_vertex.push_back(x + stress(p, gamma) * Kpow);
        if (gamma == 0.0 || p.norm() > out.grad_floor) {
            const StressJacobian sj = stress_jacobian(p, H.get(i), gamma);
            out.jacobian_det.push_back((Mat::identity(d.dim) + sj.full * Kpow).det());
        } else {
            // degenerate branch: D(|Du|^gamma Du) = 0, so D_x y = I
            out.jacobian_det.push_back(1.0);
        }
    }

    RegionMask vhit(d, false, "V-hit");
    for (const auto& rec : contact.records)
        if (!rec.touches.empty()) vhit.m[rec.vertex] = 1;
    out.measure_ratio = measure(vhit) / measure(contact.touch);
    return out;
}

namespace {

ScalarField radial_min_transform(const ScalarField& u, const RadialKernel& ker) {
    const GridDomain& d = u.dom;
    const RegionMask search = RegionMask::full(d);
    const TileIndex tiles(u, search);
    const TransformCore core(u, search, ker, tiles);
    ScalarField out(d);
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1)
            out.at(i0, i1) = core.min_blocked(i0, i1, u.at(i0, i1));
    return out;
}

}  // namespace

ScalarField inf_convolution(const ScalarField& u, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("inf_convolution: eps must be positive");
    const RadialKernel ker(u.dom, 1.0 / eps, 1.0);
    return radial_min_transform(u, ker);
}

ScalarField sup_convolution(const ScalarField& u, double eps) {
    ScalarField neg = u;
    for (double& x : neg.v) x = -x;
    ScalarField out = inf_convolution(neg, eps);
    for (double& x : out.v) x = -x;
    return out;
}

std::vector<double> default_maximal_radii(const GridDomain& dom) {
    std::vector<double> radii;
    const double diam = dom.diameter();
    for (double r = 2.0 * dom.h; r < diam; r *= 2.0) radii.push_back(r);
    radii.push_back(diam);
    return radii;
}

ScalarField maximal_function(const ScalarField& g, const RegionMask& region,
                             const std::vector<double>& radii) {
    if (g.dom != region.dom) throw std::invalid_argument("maximal_function: domain mismatch");
    if (radii.empty()) throw std::invalid_argument("maximal_function: need at least one radius");
    for (double r : radii)
        if (r < g.dom.h)
            throw std::invalid_argument("maximal_function: radii must be >= grid spacing");
    const GridDomain& d = g.dom;
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;

    // Row prefix sums of |g| restricted to the region.
    std::vector<double> pre(static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1 + 1), 0.0);
    for (int i0 = 0; i0 < n0; ++i0) {
        double acc = 0.0;
        for (int i1 = 0; i1 < n1; ++i1) {
            const std::size_t idx = d.index(i0, i1);
            if (region[idx]) acc += std::abs(g.v[idx]);
            pre[static_cast<std::size_t>(i0) * static_cast<std::size_t>(n1 + 1) +
                static_cast<std::size_t>(i1 + 1)] = acc;
        }
    }
    auto row_sum = [&](int i0, int a, int b) {  // columns [a, b] inclusive
        a = std::max(a, 0);
        b = std::min(b, n1 - 1);
        if (a > b) return 0.0;
        const std::size_t base = static_cast<std::size_t>(i0) * static_cast<std::size_t>(n1 + 1);
        return pre[base + static_cast<std::size_t>(b + 1)] - pre[base + static_cast<std::size_t>(a)];
    };

    const double hd = std::pow(d.h, d.dim);
    ScalarField out(d);
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            double best = 0.0;
            for (double r : radii) {
                const double vol = d.dim == 2 ? M_PI * r * r : 2.0 * r;
                const int kr = static_cast<int>(std::floor(r / d.h));
                double s = 0.0;
                if (d.dim == 1) {
                    s = row_sum(0, i0 - kr, i0 + kr);
                    // 1D storage is a single row in this layout
                } else {
                    for (int di = -kr; di <= kr; ++di) {
                        const int r0 = i0 + di;
                        if (r0 < 0 || r0 >= n0) continue;
                        const double rem = r * r - static_cast<double>(di) * static_cast<double>(di) * d.h * d.h;
                        if (rem < 0.0) continue;
                        const int w = static_cast<int>(std::floor(std::sqrt(rem) / d.h));
                        s += row_sum(r0, i1 - w, i1 + w);
                    }
                }
                best = std::max(best, hd * s / vol);
            }
            out.at(i0, i1) = best;
        }
    }
    return out;
}

double affine_halfrange(const ScalarField& u, const std::vector<std::uint32_t>& window,
                        const Vec& x0, const Vec& b) {
    double lo = kInf, hi = -kInf;
    for (auto idx : window) {
        const Vec dx = u.dom.point(static_cast<std::size_t>(idx)) - x0;
        const double r = u.v[idx] - b.dot(dx);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return 0.5 * (hi - lo);
}

SeminormField seminorm_field(const ScalarField& u, double alpha,
                             const std::vector<double>& radii, const RegionMask& region) {
    if (u.dom != region.dom) throw std::invalid_argument("seminorm_field: domain mismatch");
    if (radii.empty()) throw std::invalid_argument("seminorm_field: need at least one radius");
    for (double r : radii)
        if (r < 2.0 * u.dom.h)
            throw std::invalid_argument("seminorm_field: radii must be >= 2h");
    const GridDomain& d = u.dom;
    SeminormField out{ScalarField(d), RegionMask(d, false, "seminorm-flagged")};

    for (std::size_t i = 0; i < u.v.size(); ++i) {
        if (!region[i]) continue;
        const Vec x0 = d.point(i);
        double val = 0.0;
        bool any = false;
        for (double r : radii) {
            bool fits = true;
            for (int a = 0; a < d.dim; ++a)
                fits = fits && x0[a] - r >= d.lo[static_cast<std::size_t>(a)] - 1e-12 &&
                       x0[a] + r <= d.hi[static_cast<std::size_t>(a)] + 1e-12;
            if (!fits) continue;  // window exits the domain
            any = true;

            std::vector<std::uint32_t> window;
            const int kr = static_cast<int>(std::floor(r / d.h + 1e-12));
            auto [c0, c1] = d.multi_index(i);
            const int n1 = d.dim == 2 ? d.n[1] : 1;
            for (int di = -kr; di <= kr; ++di) {
                const int i0 = c0 + di;
                if (i0 < 0 || i0 >= d.n[0]) continue;
                for (int dj = d.dim == 2 ? -kr : 0; dj <= (d.dim == 2 ? kr : 0); ++dj) {
                    const int i1 = c1 + dj;
                    if (i1 < 0 || i1 >= n1) continue;
                    const std::size_t idx = d.index(i0, i1);
                    if ((d.point(idx) - x0).norm() <= r + 1e-12) window.push_back(static_cast<std::uint32_t>(idx));
                }
            }
            if (window.size() < 3) continue;

            // least-squares affine fit for the starting gradient
            double s1 = 0, sx[2] = {0, 0}, sxx[3] = {0, 0, 0}, su = 0, sxu[2] = {0, 0};
            for (auto idx : window) {
                const Vec dx = d.point(static_cast<std::size_t>(idx)) - x0;
                s1 += 1.0;
                su += u.v[idx];
                for (int a = 0; a < d.dim; ++a) {
                    sx[a] += dx[a];
                    sxu[a] += dx[a] * u.v[idx];
                }
                sxx[0] += dx[0] * dx[0];
                if (d.dim == 2) {
                    sxx[1] += dx[0] * dx[1];
                    sxx[2] += dx[1] * dx[1];
                }
            }
            Vec b(d.dim);
            if (d.dim == 1) {
                const double den = s1 * sxx[0] - sx[0] * sx[0];
                b[0] = den != 0.0 ? (s1 * sxu[0] - sx[0] * su) / den : 0.0;
            } else {
                // 3x3 normal equations, eliminate the constant first
                const double A00 = sxx[0] - sx[0] * sx[0] / s1;
                const double A01 = sxx[1] - sx[0] * sx[1] / s1;
                const double A11 = sxx[2] - sx[1] * sx[1] / s1;
                const double r0 = sxu[0] - sx[0] * su / s1;
                const double r1 = sxu[1] - sx[1] * su / s1;
                const double den = A00 * A11 - A01 * A01;
                if (den != 0.0) {
                    b[0] = (A11 * r0 - A01 * r1) / den;
                    b[1] = (A00 * r1 - A01 * r0) / den;
                }
            }

            // pattern-search refinement of the gradient; the halfrange
            // objective is convex in b
            double best = affine_halfrange(u, window, x0, b);
            double step = std::max(1e-3, 2.0 * best / std::max(r, 1e-30));
            for (int it = 0; it < 60 && step > 1e-12 * (1.0 + b.norm()); ++it) {
                bool improved = false;
                for (int a = 0; a < d.dim; ++a) {
                    for (double sgn : {1.0, -1.0}) {
                        Vec cand = b;
                        cand[a] += sgn * step;
                        const double v2 = affine_halfrange(u, window, x0, cand);
                        if (v2 < best) {
                            best = v2;
                            b = cand;
                            improved = true;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }
            val = std::max(val, best / std::pow(r, 1.0 + alpha));
        }
        if (!any) {
            out.flagged.m[i] = 1;
            out.value.v[i] = std::numeric_limits<double>::quiet_NaN();
        } else {
            out.value.v[i] = val;
        }
    }
    return out;
}

}  // namespace conelab

#include "conelab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "conelab/cones.hpp"
#include "conelab/io.hpp"
#include "conelab/operators.hpp"
#include "conelab/rng.hpp"

namespace conelab {

using ordered_json = nlohmann::ordered_json;

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::paper: return "paper";
        case Provenance::trivial: return "trivial";
        case Provenance::derived: return "derived";
    }
    return "unknown";
}

NormalizeResult normalize(const ScalarField& u, const ScalarField& f, double gamma,
                          double eps1, double eps_pad) {
    if (!(eps1 > 0.0)) throw std::invalid_argument("normalize: eps1 must be positive");
    if (!(eps_pad >= 0.0)) throw std::invalid_argument("normalize: eps_pad must be nonnegative");
    if (u.dom != f.dom) throw std::invalid_argument("normalize: domain mismatch");
    u.check_finite("normalize u");
    f.check_finite("normalize f");
    const RegionMask full = RegionMask::full(u.dom);
    const double sup_u = u.max_abs();
    const double fn = lp_norm(f, static_cast<double>(u.dom.dim), full);
    const double a = 16.0 * sup_u + std::pow(fn / eps1, 1.0 / (1.0 + gamma)) + eps_pad;
    NormalizeResult out{u, f, a};
    if (a == 0.0) return out;  // u = f = 0 with no pad: nothing to scale
    const double apow = std::pow(a, 1.0 + gamma);
    for (double& x : out.u.v) x /= a;
    for (double& x : out.f.v) x /= apow;
    return out;
}

DensityResult density_check(const ScalarField& u, const ScalarField& f, double gamma,
                            double eps, const RegionMask& B1, double pass_threshold,
                            int threads) {
    if (u.dom != f.dom || u.dom != B1.dom)
        throw std::invalid_argument("density_check: domain mismatch");
    DensityResult out;
    out.threshold = pass_threshold;
    out.oscillation = u.oscillation();
    if (out.oscillation > 0.125 + 1e-12)
        throw std::invalid_argument("density_check: oscillation precondition osc(u) <= 1/8 violated");

    const GridDomain& d = u.dom;
    const RegionMask full = RegionMask::full(d);
    const double alpha = 1.0 / (1.0 + gamma);
    const ContactSet below =
        slide_transform(u, full, 1.0, Side::below, alpha, full, SlideStrategy::blocked, threads);

    ScalarField fn(d);
    for (std::size_t i = 0; i < fn.v.size(); ++i)
        fn.v[i] = std::pow(std::abs(f.v[i]), static_cast<double>(d.dim));
    const ScalarField mf = maximal_function(fn, full, default_maximal_radii(d));

    RegionMask small(d, false, "maximal-small");
    for (std::size_t i = 0; i < small.m.size(); ++i) small.m[i] = mf.v[i] <= eps ? 1 : 0;

    const RegionMask inter = B1.intersect(below.touch).intersect(small);
    out.fraction = measure(inter) / measure(B1);
    out.passed = out.fraction >= pass_threshold;
    return out;
}

W1DeltaReport w1delta_verify(const ScalarField& u, const ScalarField& f, double gamma,
                             double delta, const RegionMask& B_half, const RegionMask& B1,
                             const W1DeltaOptions& opts) {
    if (u.dom != f.dom || u.dom != B_half.dom || u.dom != B1.dom)
        throw std::invalid_argument("w1delta_verify: domain mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("w1delta_verify: delta must be positive");
    const GridDomain& d = u.dom;
    W1DeltaReport rep;
    rep.delta = delta;

    const RegionMask full = RegionMask::full(d);
    const OpeningField of =
        opening_function(u, full, gamma, opts.K_min, opts.M, opts.k_max, full, opts.threads);
    rep.censored_fraction = of.censored_fraction(B_half);
    if (rep.censored_fraction > opts.max_censored_fraction)
        throw std::runtime_error("w1delta_verify: censoring fraction too high on B_half");

    // stress route; boundary rows are excluded from the derivative norm
    const VectorField g = gradient_central(u);
    VectorField V(d);
    ScalarField Vmag(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Vec s = stress(g.get(i), gamma);
        V.set(i, s);
        Vmag.v[i] = s.norm();
    }
    const RegionMask inner = B_half.intersect(RegionMask::interior(d, 1));
    rep.left_stress_seminorm = w1p_seminorm(V, delta, inner);
    rep.left_stress = rep.left_stress_seminorm + lp_norm(Vmag, delta, inner);

    // g route
    ScalarField gf(d);
    RegionMask gmask(d, false, "g-known");
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (B_half[i] && !of.censored[i]) {
            gf.v[i] = of.g[i];
            gmask.m[i] = 1;
        }
    }
    rep.left_g = gmask.empty() ? 0.0 : lp_norm(gf, delta, gmask);

    const double sup_u = [&] {
        double m = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (B1[i]) m = std::max(m, std::abs(u.v[i]));
        return m;
    }();
    rep.right = std::pow(sup_u, 1.0 + gamma) + lp_norm(f, static_cast<double>(d.dim), B1);
    rep.ratio = rep.right > 0.0 ? rep.left_stress / rep.right
                                : (rep.left_stress == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return rep;
}

// ---------------------------------------------------------------------
// Built-in verify suite
// ---------------------------------------------------------------------

VerifyReport builtin_verify_suite(std::uint64_t seed) {
    VerifyReport rep;
    Rng rng(seed);
    auto add = [&](const std::string& name, double measured, double tol, Provenance prov,
                   bool pass_is_le = true) {
        VerifyCheck c;
        c.name = name;
        c.measured = measured;
        c.tolerance = tol;
        c.provenance = prov;
        c.passed = pass_is_le ? measured <= tol : measured >= tol;
        rep.checks.push_back(c);
    };

    {  // Pucci duality and subadditivity chain
        DegeneracyParams pr(0.0, 1.0, 2.0);
        double worst_dual = 0.0, worst_chain = 0.0;
        for (int it = 0; it < 500; ++it) {
            const SymMat M = rng.sym(2, 4.0), N = rng.sym(2, 4.0);
            worst_dual = std::max(worst_dual,
                                  std::abs(pucci(-M, pr, PucciSign::plus) + pucci(M, pr, PucciSign::minus)));
            const double a = pucci(M, pr, PucciSign::minus) + pucci(N, pr, PucciSign::minus);
            const double b = pucci(M + N, pr, PucciSign::minus);
            const double c = pucci(M, pr, PucciSign::minus) + pucci(N, pr, PucciSign::plus);
            worst_chain = std::max(worst_chain, std::max(a - b, b - c));
        }
        add("pucci.duality", worst_dual, 1e-12, Provenance::paper);
        add("pucci.subadditivity_chain", worst_chain, 1e-12, Provenance::paper);
    }
    {  // stress identities
        double worst_hom = 0.0, worst_det = 0.0, worst_tr = 0.0;
        for (double gamma : {0.0, 0.5, 1.0, 2.0}) {
            for (int it = 0; it < 250; ++it) {
                Vec p = rng.vec(2, -2.0, 2.0);
                if (p.norm() < 1e-6) p[0] += 1.0;
                const double a = rng.uniform(0.1, 3.0);
                const Vec lhs = stress(p * a, gamma);
                const Vec rhs = stress(p, gamma) * std::pow(a, 1.0 + gamma);
                worst_hom = std::max(worst_hom, (lhs - rhs).norm() / std::max(1e-300, rhs.norm()));
                const SymMat M = rng.sym(2, 2.0);
                const StressJacobian sj = stress_jacobian(p, M, gamma);
                Vec ph = p * (1.0 / p.norm());
                Mat proj(2);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        proj(i, j) = (i == j ? 1.0 : 0.0) + gamma * ph[i] * ph[j];
                worst_det = std::max(worst_det, std::abs(proj.det() - (1.0 + gamma)));
                worst_tr = std::max(worst_tr,
                                    std::abs(p_laplacian(p, M, gamma) - sj.full.trace()));
            }
        }
        add("stress.homogeneity", worst_hom, 1e-12, Provenance::trivial);
        add("stress.projector_det", worst_det, 1e-12, Provenance::paper);
        add("stress.trace_is_plap", worst_tr, 1e-10, Provenance::trivial);
    }
    {  // cone calculus: gradient magnitude and the linear stress identity
        double worst_grad = 0.0, worst_lin = 0.0;
        for (int it = 0; it < 300; ++it) {
            Cone c;
            c.sign = ConeSign::concave;
            c.opening = rng.uniform(0.25, 4.0);
            c.alpha = rng.uniform(0.2, 1.0);
            c.vertex = rng.vec(2, -1.0, 1.0);
            c.offset = rng.uniform(-1.0, 1.0);
            Vec x = rng.vec(2, -2.0, 2.0);
            if ((x - c.vertex).norm() < 1e-3) x[0] += 0.5;
            const ConeJet jet = cone_jet(c, x);
            const double want = c.opening * std::pow((x - c.vertex).norm(), c.alpha);
            worst_grad = std::max(worst_grad, std::abs(jet.grad.norm() - want) / want);
            // |DP|^gamma DP = -K^(1+gamma) (x - y) for the matched gamma
            const double gamma = 1.0 / c.alpha - 1.0;
            const Vec vs = stress(jet.grad, gamma);
            const Vec want_vs = (x - c.vertex) * (-std::pow(c.opening, 1.0 + gamma));
            worst_lin = std::max(worst_lin, (vs - want_vs).norm() / want_vs.norm());
        }
        add("cone.grad_magnitude", worst_grad, 1e-12, Provenance::trivial);
        add("cone.stress_linearity", worst_lin, 1e-12, Provenance::paper);
    }
    {  // dyadic L^p bracket with the constant from the direct proof
        const GridDomain d = GridDomain::box(2, -1.0, 1.0, 33);
        ScalarField g(d);
        for (double& x : g.v) x = rng.uniform(0.0, 5.0);
        const RegionMask full = RegionMask::full(d);
        const double eta = 0.5, M = 2.0, p = 1.5;
        const DyadicSum s = dyadic_lp_sum(g, eta, M, p, full);
        const double npow = std::pow(lp_norm(g, p, full), p);
        const double C = std::max(std::pow(eta * M, p),
                                  1.0 / (std::pow(eta, p) * (1.0 - std::pow(M, -p))));
        const bool ok = s.S <= C * npow + 1e-12 && npow <= C * (s.S + measure(full)) + 1e-12;
        add("dyadic.bracket", ok ? 0.0 : 1.0, 0.5, Provenance::derived);
    }
    {  // normalization identity and target norms
        const GridDomain d = GridDomain::box(2, -2.0, 2.0, 17);
        ScalarField u(d), f(d);
        for (double& x : u.v) x = rng.uniform(-3.0, 3.0);
        for (double& x : f.v) x = rng.uniform(-2.0, 2.0);
        const double gamma = 1.0, eps1 = 0.25;
        const NormalizeResult nr = normalize(u, f, gamma, eps1, 0.0);
        const RegionMask full = RegionMask::full(d);
        double worst = 0.0;
        for (std::size_t i = 0; i < u.v.size(); ++i)
            worst = std::max(worst,
                             std::abs(nr.f.v[i] * std::pow(nr.a, 1.0 + gamma) - f.v[i]) /
                                 std::max(1.0, std::abs(f.v[i])));
        add("normalize.exact_identity", worst, 1e-12, Provenance::trivial);
        add("normalize.sup_bound", nr.u.max_abs(), 1.0 / 16.0 + 1e-12, Provenance::paper);
        add("normalize.fn_bound", lp_norm(nr.f, 2.0, full), eps1 + 1e-12, Provenance::paper);
    }
    {  // barrier closed form against discrete Pucci of the sampled barrier
        DegeneracyParams pr(1.0, 1.0, 2.0);
        const GridDomain d = GridDomain::box(2, 0.4, 0.6, 41);
        ScalarField phi(d);
        for (std::size_t i = 0; i < phi.v.size(); ++i) {
            const Vec x = d.point(i);
            phi.v[i] = (std::pow(x.norm(), -2.0) - std::pow(0.75, -2.0)) / 2.0;
        }
        const SymMatrixField H = hessian_central(phi);
        const std::size_t c = d.nearest_node(Vec(0.5, 0.5));
        const BarrierValue bref = barrier(d.point(c), 2, pr);
        const double num = pucci(H.get(c), pr, PucciSign::minus);
        add("barrier.pucci_closed_form", std::abs(num - bref.pucci_minus_hessian) /
                                             std::abs(bref.pucci_minus_hessian),
            0.02, Provenance::derived);
    }
    return rep;
}

// ---------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------

namespace {

GridDomain domain_from_config(const Config& cfg) {
    const int dim = static_cast<int>(cfg.get_long("grid.dim", 2));
    const double lo = cfg.get_double("grid.lo", -1.5);
    const double hi = cfg.get_double("grid.hi", 1.5);
    const int n = static_cast<int>(cfg.get_long("grid.n", 129));
    return GridDomain::box(dim, lo, hi, n);
}

DegeneracyParams params_from_config(const Config& cfg) {
    return DegeneracyParams(cfg.get_double("params.gamma", 1.0),
                            cfg.get_double("params.lambda", 1.0),
                            cfg.get_double("params.big_lambda", 1.0));
}

Vec center_from_config(const Config& cfg, const GridDomain& d) {
    Vec c(d.dim);
    c[0] = cfg.get_double("fixture.center0", 0.0);
    if (d.dim == 2) c[1] = cfg.get_double("fixture.center1", 0.0);
    return c;
}

ScalarField fixture_field(const Config& cfg, const GridDomain& d,
                          const DegeneracyParams& pr) {
    const std::string name = cfg.get_string("fixture.name", "zero");
    const double scale = cfg.get_double("fixture.scale", 1.0);
    const Vec ctr = center_from_config(cfg, d);
    if (name == "zero") return ScalarField(d, 0.0);
    if (name == "constant") return ScalarField(d, cfg.get_double("fixture.value", 1.0));
    if (name == "quadratic") {
        const double q = cfg.get_double("fixture.q", 1.0);
        return ScalarField::sample(d, [&](const Vec& x) { return 0.5 * q * (x - ctr).norm2(); });
    }
    if (name == "saddle")
        return ScalarField::sample(d, [&](const Vec& x) {
            return d.dim == 2 ? scale * (x[0] * x[0] - x[1] * x[1]) : scale * x[0] * x[0];
        });
    if (name == "cone") {
        Cone c;
        c.sign = ConeSign::concave;
        c.opening = cfg.get_double("fixture.k", 1.0);
        c.alpha = pr.alpha;
        c.vertex = ctr;
        c.offset = 0.0;
        return ScalarField::sample(d, [&](const Vec& x) { return c.value(x); });
    }
    if (name == "radial") {
        RadialSolution rs{cfg.get_double("fixture.c", 1.0), pr, ctr};
        return radial_solution(rs, d).u;
    }
    if (name == "cos") {
        const double w = cfg.get_double("fixture.freq", 2.0);
        return ScalarField::sample(d, [&](const Vec& x) {
            return scale * std::cos(w * x[0]) * (d.dim == 2 ? std::cos(w * x[1]) : 1.0);
        });
    }
    throw std::invalid_argument("fixture.name: unknown fixture '" + name + "'");
}

struct SolveOutput {
    SolveResult result;
    ProblemSpec spec;
    int clamped_rhs_nodes = 0;
};

SolveOutput run_solve_from_config(const Config& cfg, const GridDomain& d,
                                  const DegeneracyParams& pr) {
    ProblemSpec spec;
    spec.params = pr;
    const std::string opname = cfg.get_string("solve.operator", "p_laplacian");
    if (opname == "pucci_plus") spec.op = SolveOperator::pucci_plus;
    else if (opname == "pucci_minus") spec.op = SolveOperator::pucci_minus;
    else if (opname == "p_laplacian") spec.op = SolveOperator::p_laplacian;
    else throw std::invalid_argument("solve.operator: unknown operator '" + opname + "'");
    spec.reg_eps = cfg.get_double("solve.reg_eps", -1.0);
    spec.cfl = cfg.get_double("solve.cfl", 0.9);
    spec.tol_res = cfg.get_double("solve.tol_res", 1e-7);
    spec.max_iters = cfg.get_long("solve.max_iters", 400000);

    const Vec ctr = center_from_config(cfg, d);
    RadialSolution rs{cfg.get_double("fixture.c", 1.0), pr, ctr};

    SolveOutput out;
    const std::string rhsname = cfg.get_string("solve.rhs", "zero");
    spec.rhs = ScalarField(d, 0.0);
    if (rhsname == "zero") {
    } else if (rhsname == "constant") {
        spec.rhs = ScalarField(d, cfg.get_double("solve.rhs_value", 1.0));
    } else if (rhsname == "radial_fplus" || rhsname == "radial_fminus") {
        const double v = radial_rhs(rs, d.dim,
                                    rhsname == "radial_fplus" ? PucciSign::plus : PucciSign::minus);
        spec.rhs = ScalarField(d, v);
    } else if (rhsname == "singular") {
        const double s = cfg.get_double("solve.rhs_s", 0.5);
        const double scale = cfg.get_double("solve.rhs_scale", 1.0);
        spec.rhs = ScalarField::sample(d, [&](const Vec& x) {
            const double r = (x - ctr).norm();
            return r > 0.0 ? scale * std::pow(r, -s) : 0.0;
        });
        // clamp the singular node (if grid-aligned) to the neighbor average
        for (std::size_t i = 0; i < spec.rhs.v.size(); ++i) {
            if ((d.point(i) - ctr).norm() < 0.5 * d.h) {
                auto [i0, i1] = d.multi_index(i);
                double acc = 0.0;
                int cnt = 0;
                auto grab = [&](int a, int b) {
                    if (a >= 0 && a < d.n[0] && b >= 0 && (d.dim == 1 || b < d.n[1])) {
                        acc += spec.rhs.at(a, b);
                        ++cnt;
                    }
                };
                grab(i0 - 1, i1);
                grab(i0 + 1, i1);
                if (d.dim == 2) {
                    grab(i0, i1 - 1);
                    grab(i0, i1 + 1);
                }
                spec.rhs.v[i] = cnt > 0 ? acc / cnt : 0.0;
                ++out.clamped_rhs_nodes;
            }
        }
    } else {
        throw std::invalid_argument("solve.rhs: unknown rhs '" + rhsname + "'");
    }

    const std::string bname = cfg.get_string("solve.boundary", "zero");
    if (bname == "zero") spec.boundary = ScalarField(d, 0.0);
    else if (bname == "radial") spec.boundary = radial_solution(rs, d).u;
    else if (bname == "quadratic") {
        const double q = cfg.get_double("fixture.q", 1.0);
        spec.boundary = ScalarField::sample(d, [&](const Vec& x) { return 0.5 * q * (x - ctr).norm2(); });
    } else if (bname == "affine") {
        spec.boundary = ScalarField::sample(d, [&](const Vec& x) {
            return 1.0 + 3.0 * x[0] + (d.dim == 2 ? -2.0 * x[1] : 0.0);
        });
    } else {
        throw std::invalid_argument("solve.boundary: unknown boundary '" + bname + "'");
    }

    // nested iteration: solve coarse levels of the same problem first
    const bool cascade = cfg.get_bool("solve.cascade", true);
    out.spec = spec;
    if (!cascade || d.n[0] < 65) {
        out.result = relax_solve(spec, boundary_interpolant(spec.boundary));
        return out;
    }
    // build a coarse ladder with shared box; n = 2^k + 1 pattern assumed
    std::vector<int> ladder;
    for (int n = d.n[0]; n >= 33; n = (n - 1) / 2 + 1) {
        ladder.push_back(n);
        if ((n - 1) % 2 != 0) break;
    }
    std::reverse(ladder.begin(), ladder.end());
    ScalarField ufine;
    bool have = false;
    for (int n : ladder) {
        const GridDomain dl = GridDomain::box(d.dim, d.lo[0], d.hi[0], n);
        ProblemSpec sl = spec;
        // resample rhs/boundary by the defining formulas where possible
        sl.rhs = ScalarField(dl, 0.0);
        for (std::size_t i = 0; i < sl.rhs.v.size(); ++i)
            sl.rhs.v[i] = interpolate(spec.rhs, dl.point(i));
        sl.boundary = ScalarField(dl, 0.0);
        for (std::size_t i = 0; i < sl.boundary.v.size(); ++i)
            sl.boundary.v[i] = interpolate(spec.boundary, dl.point(i));
        if (n == d.n[0]) {  // exact data on the target level
            sl.rhs = spec.rhs;
            sl.boundary = spec.boundary;
        }
        ScalarField u0 = have ? prolong(ufine, dl) : boundary_interpolant(sl.boundary);
        const int n1 = dl.dim == 2 ? dl.n[1] : 1;
        for (int i0 = 0; i0 < dl.n[0]; ++i0)
            for (int i1 = 0; i1 < n1; ++i1) {
                const bool bdry = i0 == 0 || i0 == dl.n[0] - 1 ||
                                  (dl.dim == 2 && (i1 == 0 || i1 == n1 - 1));
                if (bdry) u0.at(i0, i1) = sl.boundary.at(i0, i1);
            }
        SolveResult r = relax_solve(sl, u0);
        ufine = r.u;
        have = true;
        if (n == d.n[0]) out.result = std::move(r);
    }
    return out;
}

ScalarField input_field(const Config& cfg, const GridDomain& d, const DegeneracyParams& pr,
                        ScalarField* f_out, int* clamped, ordered_json* solve_json) {
    const std::string source = cfg.get_string("input.source", "fixture");
    if (f_out) *f_out = ScalarField(d, 0.0);
    if (source == "fixture") return fixture_field(cfg, d, pr);
    if (source == "file") return read_field(cfg.get_string("input.path", ""));
    if (source == "solve") {
        SolveOutput so = run_solve_from_config(cfg, d, pr);
        if (!so.result.report.converged)
            throw std::runtime_error("input.source=solve: solver did not converge");
        if (f_out) *f_out = so.spec.rhs;
        if (clamped) *clamped = so.clamped_rhs_nodes;
        if (solve_json) {
            (*solve_json)["iterations"] = so.result.report.iterations;
            (*solve_json)["final_residual"] = so.result.report.final_residual;
        }
        return so.result.u;
    }
    throw std::invalid_argument("input.source: unknown source '" + source + "'");
}

ordered_json check_json(const VerifyCheck& c) {
    ordered_json j;
    j["name"] = c.name;
    j["status"] = c.passed ? "pass" : "fail";
    j["measured"] = c.measured;
    j["tolerance"] = c.tolerance;
    j["provenance"] = provenance_name(c.provenance);
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

void print_check(const VerifyCheck& c) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": measured "
              << format_double(c.measured) << " vs tolerance " << format_double(c.tolerance)
              << " (" << provenance_name(c.provenance) << ")\n";
}

const std::set<std::string> kCommonKeys = {
    "grid.dim",        "grid.lo",         "grid.hi",        "grid.n",
    "params.gamma",    "params.lambda",   "params.big_lambda",
    "fixture.name",    "fixture.value",   "fixture.q",      "fixture.k",
    "fixture.c",       "fixture.scale",   "fixture.center0", "fixture.center1",
    "fixture.freq",    "input.source",    "input.path",
    "solve.operator",  "solve.rhs",       "solve.rhs_value", "solve.rhs_s",
    "solve.rhs_scale", "solve.boundary",  "solve.reg_eps",  "solve.cfl",
    "solve.tol_res",   "solve.max_iters", "solve.cascade",
};

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
    std::set<std::string> s = kCommonKeys;
    for (const auto& k : extra) s.insert(k);
    return s;
}

}  // namespace

int run_experiment(const Config& cfg, const std::string& kind, const std::string& out_dir,
                   std::uint64_t seed, int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto outpath = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    ordered_json summary;
    summary["kind"] = kind;
    summary["seed"] = seed;
    {
        ordered_json jc;
        for (const auto& [k, v] : cfg.entries()) jc[k] = v;
        summary["config"] = jc;
    }

    std::vector<VerifyCheck> checks;
    auto add_check = [&](const std::string& name, bool passed, double measured, double tol,
                         Provenance prov, const std::string& note = "") {
        VerifyCheck c;
        c.name = name;
        c.passed = passed;
        c.measured = measured;
        c.tolerance = tol;
        c.provenance = prov;
        c.note = note;
        checks.push_back(c);
    };

    if (kind == "verify") {
        cfg.validate(with_common({}), {});
        VerifyReport rep = builtin_verify_suite(seed);
        checks = rep.checks;
    } else if (kind == "solve") {
        cfg.validate(with_common({"solve.write_solution"}), {});
        const GridDomain d = domain_from_config(cfg);
        const DegeneracyParams pr = params_from_config(cfg);
        SolveOutput so = run_solve_from_config(cfg, d, pr);
        add_check("solve.converged", so.result.report.converged,
                  so.result.report.final_residual, so.spec.tol_res, Provenance::trivial);
        summary["solve"] = {{"iterations", so.result.report.iterations},
                            {"final_residual", so.result.report.final_residual},
                            {"clamped_rhs_nodes", so.clamped_rhs_nodes}};
        if (cfg.get_bool("solve.write_solution", true)) {
            write_field(so.result.u, outpath("solution.fld"));
            write_field(residual(so.result.u, so.spec), outpath("residual.fld"));
            summary["outputs"] = {"solution.fld", "residual.fld"};
        }
    } else if (kind == "contact") {
        cfg.validate(with_common({"contact.k", "contact.opening", "contact.k_min",
                                  "contact.m", "contact.k_max"}),
                     {});
        const GridDomain d = domain_from_config(cfg);
        const DegeneracyParams pr = params_from_config(cfg);
        ordered_json sj;
        ScalarField u = input_field(cfg, d, pr, nullptr, nullptr, &sj);
        const double K = cfg.get_double("contact.k", 1.0);
        const RegionMask full = RegionMask::full(d);
        const ContactSet below =
            slide_transform(u, full, K, Side::below, pr.alpha, full, SlideStrategy::blocked, threads);
        const ContactSet above =
            slide_transform(u, full, K, Side::above, pr.alpha, full, SlideStrategy::blocked, threads);

        // duality: above-side masks must equal the below-side masks of -u
        ScalarField neg = u;
        for (double& x : neg.v) x = -x;
        const ContactSet dual =
            slide_transform(neg, full, K, Side::below, pr.alpha, full, SlideStrategy::blocked, threads);
        bool same = dual.touch.m == above.touch.m;
        add_check("contact.duality_masks", same, same ? 0.0 : 1.0, 0.5, Provenance::paper);

        ScalarField tmask(d), tmask_p(d);
        for (std::size_t i = 0; i < d.size(); ++i) {
            tmask.v[i] = below.touch[i] ? 1.0 : 0.0;
            tmask_p.v[i] = above.touch[i] ? 1.0 : 0.0;
        }
        write_field_csv(tmask, outpath("touch_below.csv"));
        write_field_csv(tmask_p, outpath("touch_above.csv"));
        summary["contact"] = {{"K", K},
                              {"measure_below", measure(below.touch)},
                              {"measure_above", measure(above.touch)}};
        // a few slid cones as JSON records
        ordered_json cones = ordered_json::array();
        std::size_t emitted = 0;
        for (const auto& rec : below.records) {
            if (rec.touches.empty()) continue;
            const Vec y = d.point(static_cast<std::size_t>(rec.vertex));
            ordered_json jc;
            jc["sign"] = "concave";
            jc["K"] = K;
            jc["vertex"] = d.dim == 2 ? ordered_json::array({y[0], y[1]})
                                      : ordered_json::array({y[0]});
            jc["C"] = rec.slide_constant;
            jc["alpha"] = pr.alpha;
            cones.push_back(jc);
            if (++emitted >= 8) break;
        }
        summary["cones"] = cones;
        ordered_json outs = ordered_json::array({"touch_below.csv", "touch_above.csv"});
        if (cfg.get_bool("contact.opening", false)) {
            const OpeningField of = opening_function(
                u, full, pr.gamma, cfg.get_double("contact.k_min", 0.25),
                cfg.get_double("contact.m", 2.0),
                static_cast<int>(cfg.get_long("contact.k_max", 16)), full, threads);
            write_opening_csv(of, outpath("opening.csv"));
            outs.push_back("opening.csv");
            ScalarField gf(d, 0.0);
            for (std::size_t i = 0; i < d.size(); ++i)
                if (!of.censored[i]) gf.v[i] = of.g[i];
            write_field(gf, outpath("g.fld"));
            outs.push_back("g.fld");
            summary["opening"] = {{"censored_fraction", of.censored_fraction(full)},
                                  {"K_min", of.K_min},
                                  {"M", of.M},
                                  {"k_max", of.k_max}};
        }
        summary["outputs"] = outs;
        if (!sj.empty()) summary["solve"] = sj;
    } else if (kind == "decay") {
        cfg.validate(with_common({"decay.m", "decay.k_max", "decay.sigma_min",
                                  "decay.b1_radius", "w1.delta"}),
                     {});
        const GridDomain d = domain_from_config(cfg);
        const DegeneracyParams pr = params_from_config(cfg);
        ordered_json sj;
        ScalarField f;
        int clamped = 0;
        ScalarField u = input_field(cfg, d, pr, &f, &clamped, &sj);
        const double M = cfg.get_double("decay.m", 2.0);
        const int k_max = static_cast<int>(cfg.get_long("decay.k_max", 8));
        const double b1r = cfg.get_double("decay.b1_radius", 1.0);
        const RegionMask B1 = RegionMask::ball(d, Vec(0.0, 0.0), b1r);
        const RegionMask full = RegionMask::full(d);

        const DecayCurve dc = decay_curve(u, pr.gamma, M, k_max, B1, full, threads);
        write_decay_csv(dc, outpath("decay.csv"));
        summary["decay"] = {{"M", dc.M},
                            {"sigma", dc.sigma},
                            {"residual", dc.residual},
                            {"noise_floor", dc.noise_floor},
                            {"sigma_infinite", dc.sigma_infinite},
                            {"fit_defined", dc.fit_defined}};
        bool mono = true;
        for (std::size_t k = 1; k < dc.m.size(); ++k) mono = mono && dc.m[k] <= dc.m[k - 1] + 1e-15;
        add_check("decay.monotone", mono, mono ? 0.0 : 1.0, 0.5, Provenance::paper);
        const double sigma_min = cfg.get_double("decay.sigma_min", 0.1);
        if (dc.sigma_infinite)
            add_check("decay.sigma_positive", true, std::numeric_limits<double>::infinity(),
                      sigma_min, Provenance::derived, "all levels beyond k=0 below the noise floor");
        else
            add_check("decay.sigma_positive", dc.fit_defined && dc.sigma > sigma_min, dc.sigma,
                      sigma_min, Provenance::derived);

        // W^{1,delta} surrogate at delta tied to the fitted decay
        if (dc.fit_defined && dc.sigma > 0.0) {
            const double delta =
                cfg.get_double("w1.delta", 0.5 * dc.sigma * (1.0 + pr.gamma));
            const RegionMask Bh = RegionMask::ball(d, Vec(0.0, 0.0), 0.5 * b1r);
            try {
                const W1DeltaReport wr =
                    w1delta_verify(u, f, pr.gamma, delta, Bh, B1, {0.25, 2.0, 16, 0.05, threads});
                summary["w1delta"] = {{"delta", wr.delta},
                                      {"left_stress", wr.left_stress},
                                      {"left_g", wr.left_g},
                                      {"right", wr.right},
                                      {"ratio", wr.ratio},
                                      {"censored_fraction", wr.censored_fraction}};
                add_check("w1delta.ratio_finite", std::isfinite(wr.ratio), wr.ratio,
                          std::numeric_limits<double>::infinity(), Provenance::derived);
            } catch (const std::runtime_error& e) {
                add_check("w1delta.ratio_finite", false, 0.0, 0.0, Provenance::derived, e.what());
            }
        }
        summary["clamped_rhs_nodes"] = clamped;
        summary["outputs"] = {"decay.csv"};
        if (!sj.empty()) summary["solve"] = sj;
    } else if (kind == "seminorm") {
        cfg.validate(with_common({"seminorm.r_max"}), {});
        const GridDomain d = domain_from_config(cfg);
        const DegeneracyParams pr = params_from_config(cfg);
        ScalarField u = input_field(cfg, d, pr, nullptr, nullptr, nullptr);
        const double rmax = cfg.get_double("seminorm.r_max", 0.25);
        std::vector<double> radii;
        for (double r = 2.0 * d.h; r <= rmax; r *= 2.0) radii.push_back(r);
        if (radii.empty()) radii.push_back(2.0 * d.h);
        const RegionMask region = RegionMask::ball(d, Vec(0.0, 0.0), 1.0);
        const SeminormField sf = seminorm_field(u, pr.alpha, radii, region);
        write_field(sf.value, outpath("seminorm.fld"));
        write_field_csv(sf.value, outpath("seminorm.csv"));
        double finite_frac = 0.0, total = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!region[i]) continue;
            total += 1.0;
            if (!sf.flagged[i] && std::isfinite(sf.value.v[i])) finite_frac += 1.0;
        }
        finite_frac = total > 0 ? finite_frac / total : 0.0;
        add_check("seminorm.mostly_defined", finite_frac > 0.5, finite_frac, 0.5,
                  Provenance::trivial);
        summary["outputs"] = {"seminorm.fld", "seminorm.csv"};
    } else if (kind == "density") {
        cfg.validate(with_common({"density.eps", "density.min_fraction", "density.eps1",
                                  "density.b1_radius"}),
                     {});
        const GridDomain d = domain_from_config(cfg);
        const DegeneracyParams pr = params_from_config(cfg);
        ScalarField f;
        int clamped = 0;
        ordered_json sj;
        ScalarField u = input_field(cfg, d, pr, &f, &clamped, &sj);
        const NormalizeResult nr =
            normalize(u, f, pr.gamma, cfg.get_double("density.eps1", 0.25), 1e-9);
        const double b1r = cfg.get_double("density.b1_radius", 1.0);
        const RegionMask B1 = RegionMask::ball(d, Vec(0.0, 0.0), b1r);
        const DensityResult dr =
            density_check(nr.u, nr.f, pr.gamma, cfg.get_double("density.eps", 0.1), B1,
                          cfg.get_double("density.min_fraction", 0.05), threads);
        add_check("density.fraction", dr.passed, dr.fraction, dr.threshold, Provenance::derived);
        summary["density"] = {{"fraction", dr.fraction},
                              {"oscillation", dr.oscillation},
                              {"normalization_a", nr.a}};
        if (!sj.empty()) summary["solve"] = sj;
    } else {
        throw std::invalid_argument("run_experiment: unknown kind '" + kind + "'");
    }

    ordered_json jchecks = ordered_json::array();
    for (const auto& c : checks) {
        jchecks.push_back(check_json(c));
        print_check(c);
    }
    summary["checks"] = jchecks;
    bool all = true;
    for (const auto& c : checks) all = all && c.passed;
    summary["status"] = all ? "pass" : "fail";

    std::ofstream os(outpath("summary.json"));
    if (!os) throw std::runtime_error("run_experiment: cannot write summary.json");
    os << summary.dump(2) << '\n';
    return all ? 0 : 1;
}

}  // namespace conelab

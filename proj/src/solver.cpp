#include "conelab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conelab {

namespace {

// Inline 9-point evaluator for the regularized operator at an interior
// node; matches gradient_central / hessian_central on interior nodes.
struct NodeOp {
    const double* u;
    int n0, n1, dim;
    double h, inv2h, invh2, eps2;
    double gamma, lambda, Lambda;
    SolveOperator op;

    double defect(int i0, int i1, double f) const {
        const std::size_t c = static_cast<std::size_t>(i0) * static_cast<std::size_t>(n1) +
                              static_cast<std::size_t>(i1);
        double coef;
        return value(c, coef) - f;
    }

    // coefficient (|Du|^2 + eps^2)^(gamma/2) is exported for the local step
    double value(std::size_t c, double& coef_out) const {
        const std::size_t s1 = 1;
        const std::size_t s0 = static_cast<std::size_t>(n1);
        const double uc = u[c];
        double p0, p1 = 0.0;
        double m00, m11 = 0.0, m01 = 0.0;
        p0 = (u[c + s0] - u[c - s0]) * inv2h;
        m00 = (u[c + s0] - 2.0 * uc + u[c - s0]) * invh2;
        if (dim == 2) {
            p1 = (u[c + s1] - u[c - s1]) * inv2h;
            m11 = (u[c + s1] - 2.0 * uc + u[c - s1]) * invh2;
            m01 = (u[c + s0 + s1] - u[c + s0 - s1] - u[c - s0 + s1] + u[c - s0 - s1]) *
                  (0.25 * invh2);
        }
        const double g2 = p0 * p0 + p1 * p1 + eps2;
        double coef;
        if (gamma == 0.0) coef = 1.0;
        else if (gamma == 1.0) coef = std::sqrt(g2);
        else if (gamma == 2.0) coef = g2;
        else coef = std::pow(g2, 0.5 * gamma);
        coef_out = coef;

        double opval;
        if (op == SolveOperator::p_laplacian) {
            const double tr = m00 + m11;
            // g2 = 0 only with reg_eps = 0 at a critical point; the limit
            // of the quadratic term is 0 there
            const double quad =
                g2 > 0.0 ? (p0 * p0 * m00 + 2.0 * p0 * p1 * m01 + p1 * p1 * m11) / g2 : 0.0;
            opval = tr + gamma * quad;
        } else {
            double e1, e2;
            if (dim == 1) {
                e1 = m00;
                e2 = 0.0;
            } else {
                const double mean = 0.5 * (m00 + m11);
                const double dd = 0.5 * (m00 - m11);
                const double s = std::sqrt(dd * dd + m01 * m01);
                e1 = mean - s;
                e2 = mean + s;
            }
            double neg = 0.0, pos = 0.0;
            if (e1 < 0.0) neg += e1; else if (e1 > 0.0) pos += e1;
            if (dim == 2) {
                if (e2 < 0.0) neg += e2; else if (e2 > 0.0) pos += e2;
            }
            opval = op == SolveOperator::pucci_plus ? lambda * neg + Lambda * pos
                                                    : Lambda * neg + lambda * pos;
        }
        return coef * opval;
    }
};

NodeOp make_node_op(const ScalarField& u, const ProblemSpec& spec) {
    const GridDomain& d = u.dom;
    NodeOp nop;
    nop.u = u.v.data();
    nop.n0 = d.n[0];
    nop.n1 = d.dim == 2 ? d.n[1] : 1;
    nop.dim = d.dim;
    nop.h = d.h;
    nop.inv2h = 1.0 / (2.0 * d.h);
    nop.invh2 = 1.0 / (d.h * d.h);
    const double eps = spec.effective_reg_eps(d.h);
    nop.eps2 = eps * eps;
    nop.gamma = spec.params.gamma;
    nop.lambda = spec.params.lambda;
    nop.Lambda = spec.params.Lambda;
    nop.op = spec.op;
    return nop;
}

void check_problem(const ProblemSpec& spec) {
    if (!(spec.tol_res > 0.0)) throw std::invalid_argument("ProblemSpec: tol_res must be positive");
    if (spec.reg_eps >= 0.0 && !(spec.reg_eps >= 0.0))
        throw std::invalid_argument("ProblemSpec: reg_eps must be nonnegative");
    if (!(spec.cfl > 0.0 && spec.cfl <= 1.0))
        throw std::invalid_argument("ProblemSpec: cfl must be in (0,1]");
    if (spec.rhs.dom != spec.boundary.dom)
        throw std::invalid_argument("ProblemSpec: rhs and boundary must share the grid");
    spec.rhs.check_finite("ProblemSpec rhs");
    spec.boundary.check_finite("ProblemSpec boundary");
}

}  // namespace

ScalarField boundary_interpolant(const ScalarField& boundary) {
    const GridDomain& d = boundary.dom;
    ScalarField u(d);
    if (d.dim == 1) {
        const double a = boundary.at(0), b = boundary.at(d.n[0] - 1);
        for (int i = 0; i < d.n[0]; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(d.n[0] - 1);
            u.at(i) = (1.0 - t) * a + t * b;
        }
        return u;
    }
    const int n0 = d.n[0], n1 = d.n[1];
    for (int i = 0; i < n0; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n0 - 1);
        for (int j = 0; j < n1; ++j) {
            const double t = static_cast<double>(j) / static_cast<double>(n1 - 1);
            const double edges = (1.0 - s) * boundary.at(0, j) + s * boundary.at(n0 - 1, j) +
                                 (1.0 - t) * boundary.at(i, 0) + t * boundary.at(i, n1 - 1);
            const double corners = (1.0 - s) * (1.0 - t) * boundary.at(0, 0) +
                                   (1.0 - s) * t * boundary.at(0, n1 - 1) +
                                   s * (1.0 - t) * boundary.at(n0 - 1, 0) +
                                   s * t * boundary.at(n0 - 1, n1 - 1);
            u.at(i, j) = edges - corners;
        }
    }
    // the blend cancels only up to rounding on the boundary; pin it exactly
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j)
            if (i == 0 || j == 0 || i == n0 - 1 || j == n1 - 1) u.at(i, j) = boundary.at(i, j);
    return u;
}

ScalarField prolong(const ScalarField& coarse, const GridDomain& fine) {
    ScalarField out(fine);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        Vec x = fine.point(i);
        // clamp against the coarse box to absorb rounding at the edges
        for (int a = 0; a < fine.dim; ++a)
            x[a] = std::clamp(x[a], coarse.dom.lo[static_cast<std::size_t>(a)],
                              coarse.dom.hi[static_cast<std::size_t>(a)]);
        out.v[i] = interpolate(coarse, x);
    }
    return out;
}

ScalarField residual(const ScalarField& u, const ProblemSpec& spec) {
    check_problem(spec);
    if (u.dom != spec.rhs.dom) throw std::invalid_argument("residual: grid mismatch");
    const GridDomain& d = u.dom;
    ScalarField res(d);
    const NodeOp nop = make_node_op(u, spec);
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
    for (int i0 = 1; i0 < n0 - 1; ++i0)
        for (int i1 = (d.dim == 2 ? 1 : 0); i1 < (d.dim == 2 ? n1 - 1 : 1); ++i1)
            res.at(i0, i1) = nop.defect(i0, i1, spec.rhs.at(i0, i1));
    return res;
}

SolveResult relax_solve(const ProblemSpec& spec, const ScalarField& u0) {
    check_problem(spec);
    if (u0.dom != spec.rhs.dom) throw std::invalid_argument("relax_solve: grid mismatch");
    const GridDomain& d = u0.dom;
    const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;

    // boundary rows of u0 must match the Dirichlet data
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1) {
            const bool bdry = i0 == 0 || i0 == n0 - 1 ||
                              (d.dim == 2 && (i1 == 0 || i1 == n1 - 1));
            if (bdry && u0.at(i0, i1) != spec.boundary.at(i0, i1))
                throw std::invalid_argument("relax_solve: u0 does not match the boundary data");
        }

    const auto t_start = std::chrono::steady_clock::now();
    SolveResult out{u0, {}};
    ScalarField& u = out.u;

    const double tau_base = spec.cfl * d.h * d.h /
                            (2.0 * static_cast<double>(d.dim) * spec.params.Lambda);
    const double omega_max =
        std::min(1.92, 2.0 / (1.0 + std::sin(M_PI * d.h / (d.hi[0] - d.lo[0]))));
    double omega = 1.0;

    auto linf_residual = [&]() {
        const NodeOp nop = make_node_op(u, spec);
        double r = 0.0;
        for (int i0 = 1; i0 < n0 - 1; ++i0)
            for (int i1 = (d.dim == 2 ? 1 : 0); i1 < (d.dim == 2 ? n1 - 1 : 1); ++i1) {
                const double def = nop.defect(i0, i1, spec.rhs.at(i0, i1));
                if (!std::isfinite(def)) return std::numeric_limits<double>::infinity();
                r = std::max(r, std::abs(def));
            }
        return r;
    };

    double prev_check = linf_residual();
    if (prev_check <= spec.tol_res) {
        out.report.converged = true;
        out.report.final_residual = prev_check;
        out.report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return out;
    }

    const int check_every = 16;
    long sweep = 0;
    for (; sweep < spec.max_iters; ++sweep) {
        const NodeOp nop = make_node_op(u, spec);
        // Four-color ordering: nodes of one color never appear in each
        // other's 9-point stencils, so in-place color phases are
        // order-independent and deterministic.
        for (int color = 0; color < 4; ++color) {
            const int c0 = color >> 1, c1 = color & 1;
            for (int i0 = 1 + ((1 + c0) & 1); i0 < n0 - 1; i0 += 2) {
                if (d.dim == 1) {
                    // two colors suffice in 1D
                    if (c1 == 1) continue;
                    double coef;
                    const std::size_t idx = d.index(i0, 0);
                    const double val = nop.value(idx, coef);
                    const double tau = tau_base / coef;
                    u.v[idx] += omega * tau * (val - spec.rhs.v[idx]);
                    continue;
                }
                for (int i1 = 1 + ((1 + c1) & 1); i1 < n1 - 1; i1 += 2) {
                    double coef;
                    const std::size_t idx = d.index(i0, i1);
                    const double val = nop.value(idx, coef);
                    const double tau = tau_base / coef;
                    u.v[idx] += omega * tau * (val - spec.rhs.v[idx]);
                }
            }
        }
        if ((sweep + 1) % check_every == 0) {
            const double r = linf_residual();
            if (!std::isfinite(r)) {  // blew up; restart damped from the interpolant
                u = boundary_interpolant(spec.boundary);
                omega = 1.0;
                prev_check = linf_residual();
                continue;
            }
            if (r <= spec.tol_res) {
                out.report.converged = true;
                out.report.final_residual = r;
                out.report.iterations = sweep + 1;
                out.report.wall_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                        .count();
                return out;
            }
            if (r < prev_check)
                omega = std::min(omega_max, omega * 1.15);
            else
                omega = std::max(1.0, 1.0 + (omega - 1.0) * 0.3);
            prev_check = r;
        }
    }
    out.report.converged = false;
    out.report.iterations = sweep;
    out.report.final_residual = linf_residual();
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

RefineStudy refine_study(const std::vector<ProblemSpec>& specs,
                         const std::vector<ScalarField>& exact_fields,
                         const std::vector<RegionMask>& annuli) {
    if (specs.size() != exact_fields.size() || specs.size() != annuli.size())
        throw std::invalid_argument("refine_study: level arrays must have equal length");
    RefineStudy study;
    ScalarField prev;
    bool have_prev = false;
    double prev_err = 0.0;
    for (std::size_t lvl = 0; lvl < specs.size(); ++lvl) {
        const GridDomain& d = specs[lvl].rhs.dom;
        ScalarField u0 = have_prev ? prolong(prev, d) : boundary_interpolant(specs[lvl].boundary);
        // prolongation does not preserve boundary rows exactly; restore them
        const int n0 = d.n[0], n1 = d.dim == 2 ? d.n[1] : 1;
        for (int i0 = 0; i0 < n0; ++i0)
            for (int i1 = 0; i1 < n1; ++i1) {
                const bool bdry = i0 == 0 || i0 == n0 - 1 ||
                                  (d.dim == 2 && (i1 == 0 || i1 == n1 - 1));
                if (bdry) u0.at(i0, i1) = specs[lvl].boundary.at(i0, i1);
            }
        SolveResult sol = relax_solve(specs[lvl], u0);
        RefineRow row;
        row.h = d.h;
        row.converged = sol.report.converged;
        if (!sol.report.converged) {
            study.all_converged = false;
            study.rows.push_back(row);
            // keep going; later levels may still help diagnosis
            continue;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < sol.u.v.size(); ++i)
            if (annuli[lvl][i]) err = std::max(err, std::abs(sol.u.v[i] - exact_fields[lvl].v[i]));
        row.error = err;
        row.exact_floor = err < 1e-11 * (1.0 + exact_fields[lvl].max_abs());
        if (have_prev && err > 0.0 && prev_err > 0.0)
            row.observed_order = std::log2(prev_err / err);
        study.rows.push_back(row);
        prev = sol.u;
        prev_err = err;
        have_prev = true;
    }
    return study;
}

}  // namespace conelab

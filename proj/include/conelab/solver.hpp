#pragma once

#include <string>
#include <vector>

#include "conelab/field.hpp"
#include "conelab/operators.hpp"

namespace conelab {

enum class SolveOperator { pucci_plus, pucci_minus, p_laplacian };

// Discrete Dirichlet problem for |Du|^gamma Op(D^2u) = f on the grid box.
struct ProblemSpec {
    DegeneracyParams params;
    SolveOperator op = SolveOperator::p_laplacian;
    ScalarField rhs;           // f on the full grid; only interior values used
    ScalarField boundary;      // g on the full grid; only boundary values used
    double reg_eps = -1.0;     // gradient regularization; < 0 means "use h"
    double cfl = 0.9;
    double tol_res = 1e-7;
    long max_iters = 200000;

    double effective_reg_eps(double h) const { return reg_eps < 0.0 ? h : reg_eps; }
};

struct SolveReport {
    long iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    double wall_seconds = 0.0;
};

struct SolveResult {
    ScalarField u;
    SolveReport report;
};

// Pointwise relaxation toward the steady state of the regularized
// equation; boundary values preserved exactly. Non-convergence within
// max_iters is reported, not thrown.
SolveResult relax_solve(const ProblemSpec& spec, const ScalarField& u0);

// Interior defect of the regularized equation; boundary rows zero.
ScalarField residual(const ScalarField& u, const ProblemSpec& spec);

// Transfinite (Coons) interpolation of the boundary values: the default
// initial guess.
ScalarField boundary_interpolant(const ScalarField& boundary);

// Prolong a solution to a finer grid of the same box by multilinear
// interpolation; used for nested iteration across refinement levels.
ScalarField prolong(const ScalarField& coarse, const GridDomain& fine);

struct RefineRow {
    double h = 0.0;
    double error = 0.0;          // annulus L-inf error vs the reference
    double observed_order = 0.0; // log2(err_prev / err); 0 on the first row
    bool converged = false;
    bool exact_floor = false;    // error at floating-point floor
};

struct RefineStudy {
    std::vector<RefineRow> rows;
    bool all_converged = true;
};

// Solves the same problem on each level and compares against the exact
// reference on the annulus mask; specs and exact fields are per level.
RefineStudy refine_study(const std::vector<ProblemSpec>& specs,
                         const std::vector<ScalarField>& exact_fields,
                         const std::vector<RegionMask>& annuli);

}  // namespace conelab

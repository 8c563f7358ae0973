#pragma once

#include "conelab/field.hpp"
#include "conelab/geometry.hpp"

namespace conelab {

enum class PucciSign { plus, minus };

// Ellipticity and degeneracy constants; alpha is tied to gamma.
struct DegeneracyParams {
    double gamma = 0.0;
    double alpha = 1.0;  // always 1/(1+gamma)
    double lambda = 1.0;
    double Lambda = 1.0;

    DegeneracyParams() = default;
    DegeneracyParams(double gamma_, double lambda_, double Lambda_);
};

// Pucci extremal operators from the eigenvalues of M.
// P+ = lambda * sum(e<0) + Lambda * sum(e>0), P- with the weights swapped.
double pucci(const SymMat& M, const DegeneracyParams& params, PucciSign sign);

// |p|^gamma * P_sign(M). Defined as 0 at p = 0 when gamma > 0 (limit
// value); reduces to pucci when gamma = 0.
double degenerate_op(const Vec& p, const SymMat& M, const DegeneracyParams& params,
                     PucciSign sign);

// Stress map V(p) = |p|^gamma p. V(0) = 0, positively homogeneous of
// degree 1 + gamma.
Vec stress(const Vec& p, double gamma);

struct StressJacobian {
    Mat full;           // |p|^gamma (I + gamma p^ (x) p^) M
    SymMat symmetrized; // (I+B) A (I+B) - B A B, A = |p|^gamma M, B = (gamma/2) p^ (x) p^
};

// Jacobian of x -> V(Du) given p = Du(x) and M = D^2u(x). Refuses p = 0
// for gamma > 0; the zero-gradient branch is handled by callers.
StressJacobian stress_jacobian(const Vec& p, const SymMat& M, double gamma);

// Nondivergence p-Laplacian |p|^gamma (tr M + gamma <M p^, p^>), with
// p = gamma + 2. Zero at p = 0 for gamma > 0, tr M for gamma = 0.
double p_laplacian(const Vec& p, const SymMat& M, double gamma);

// Exact homogeneous profile u = c |x - center|^(1+alpha); the fixture the
// degenerate operators are validated against.
struct RadialSolution {
    double c = 1.0;
    DegeneracyParams params;
    Vec center;

    double beta() const { return 1.0 + params.alpha; }
};

struct RadialSample {
    ScalarField u;
    double f_plus = 0.0;   // |Du|^gamma P+(D^2u), constant in x
    double f_minus = 0.0;  // |Du|^gamma P-(D^2u), constant in x
};

RadialSample radial_solution(const RadialSolution& spec, const GridDomain& domain);

// Closed-form radial right-hand sides for u = c |x|^(1+alpha) in n dims.
double radial_rhs(const RadialSolution& spec, int n, PucciSign sign);

struct BarrierValue {
    double value = 0.0;
    Vec grad;
    double pucci_minus_hessian = 0.0;  // P-(D^2 phi)(x)
};

// phi(x) = (|x|^-p - (3/4)^-p)/p on |x| >= 1/4;
// P-(D^2 phi) = ((p+1) lambda - (n-1) Lambda) / |x|^(p+2).
BarrierValue barrier(const Vec& x, int p_exp, const DegeneracyParams& params);

}  // namespace conelab

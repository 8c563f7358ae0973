#include "conelab/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace conelab {

DegeneracyParams::DegeneracyParams(double gamma_, double lambda_, double Lambda_)
    : gamma(gamma_), alpha(1.0 / (1.0 + gamma_)), lambda(lambda_), Lambda(Lambda_) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("DegeneracyParams: gamma must be >= 0");
    if (!(lambda > 0.0) || !(lambda <= Lambda))
        throw std::invalid_argument("DegeneracyParams: need 0 < lambda <= Lambda");
}

double pucci(const SymMat& M, const DegeneracyParams& params, PucciSign sign) {
    if (!M.finite()) throw std::invalid_argument("pucci: non-finite matrix entries");
    const auto e = M.eigenvalues();
    double neg = 0.0, pos = 0.0;
    for (int i = 0; i < M.dim; ++i) {
        const double ei = e[static_cast<std::size_t>(i)];
        if (ei < 0.0)
            neg += ei;
        else if (ei > 0.0)
            pos += ei;
    }
    if (sign == PucciSign::plus) return params.lambda * neg + params.Lambda * pos;
    return params.Lambda * neg + params.lambda * pos;
}

double degenerate_op(const Vec& p, const SymMat& M, const DegeneracyParams& params,
                     PucciSign sign) {
    if (!p.finite() || !M.finite())
        throw std::invalid_argument("degenerate_op: non-finite input");
    if (params.gamma == 0.0) return pucci(M, params, sign);
    const double np = p.norm();
    if (np == 0.0) return 0.0;
    return std::pow(np, params.gamma) * pucci(M, params, sign);
}

Vec stress(const Vec& p, double gamma) {
    if (gamma == 0.0) return p;
    const double np = p.norm();
    if (np == 0.0) return Vec(p.dim);
    return p * std::pow(np, gamma);
}

StressJacobian stress_jacobian(const Vec& p, const SymMat& M, double gamma) {
    const double np = p.norm();
    if (np == 0.0 && gamma > 0.0)
        throw std::domain_error("stress_jacobian: undefined at p = 0 for gamma > 0");
    StressJacobian out;
    const int d = p.dim;
    if (np == 0.0) {  // gamma == 0: V is the identity map
        out.full = Mat::from_sym(M);
        out.symmetrized = M;
        return out;
    }
    Vec ph = p * (1.0 / np);
    const double coef = std::pow(np, gamma);

    Mat proj(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) proj(i, j) = (i == j ? 1.0 : 0.0) + gamma * ph[i] * ph[j];
    out.full = proj.matmul(Mat::from_sym(M)) * coef;

    // (I+B) A (I+B) - B A B with A = |p|^gamma M, B = (gamma/2) ph (x) ph
    Mat A = Mat::from_sym(M) * coef;
    Mat B(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) B(i, j) = 0.5 * gamma * ph[i] * ph[j];
    Mat IB = Mat::identity(d) + B;
    Mat S = IB.matmul(A).matmul(IB) + B.matmul(A).matmul(B) * -1.0;
    out.symmetrized = S.symmetrize();
    return out;
}

double p_laplacian(const Vec& p, const SymMat& M, double gamma) {
    if (gamma == 0.0) return M.trace();
    const double np = p.norm();
    if (np == 0.0) return 0.0;
    Vec ph = p * (1.0 / np);
    return std::pow(np, gamma) * (M.trace() + gamma * M.quad(ph));
}

double radial_rhs(const RadialSolution& spec, int n, PucciSign sign) {
    if (spec.c == 0.0) throw std::invalid_argument("radial_solution: c must be nonzero");
    const DegeneracyParams& pr = spec.params;
    const double mag = std::pow(std::abs(spec.c) * (1.0 + pr.alpha), 1.0 + pr.gamma) *
                       (static_cast<double>(n) - 1.0 + pr.alpha);
    // c > 0: the Hessian is positive, so P+ picks Lambda and P- picks
    // lambda; c < 0 mirrors with a sign flip.
    if (spec.c > 0.0) return (sign == PucciSign::plus ? pr.Lambda : pr.lambda) * mag;
    return -(sign == PucciSign::plus ? pr.lambda : pr.Lambda) * mag;
}

RadialSample radial_solution(const RadialSolution& spec, const GridDomain& domain) {
    if (spec.c == 0.0) throw std::invalid_argument("radial_solution: c must be nonzero");
    RadialSample out{ScalarField(domain), 0.0, 0.0};
    const double expo = 1.0 + spec.params.alpha;
    for (std::size_t i = 0; i < out.u.v.size(); ++i) {
        Vec x = domain.point(i);
        out.u.v[i] = spec.c * std::pow((x - spec.center).norm(), expo);
    }
    out.f_plus = radial_rhs(spec, domain.dim, PucciSign::plus);
    out.f_minus = radial_rhs(spec, domain.dim, PucciSign::minus);
    return out;
}

BarrierValue barrier(const Vec& x, int p_exp, const DegeneracyParams& params) {
    if (p_exp < 1) throw std::invalid_argument("barrier: p_exp must be >= 1");
    const double r = x.norm();
    if (r < 0.25) throw std::domain_error("barrier: formula region is |x| >= 1/4");
    const double p = static_cast<double>(p_exp);
    BarrierValue out;
    out.value = (std::pow(r, -p) - std::pow(0.75, -p)) / p;
    out.grad = x * (-std::pow(r, -(p + 2.0)));
    const double n = static_cast<double>(x.dim);
    out.pucci_minus_hessian =
        ((p + 1.0) * params.lambda - (n - 1.0) * params.Lambda) / std::pow(r, p + 2.0);
    return out;
}

}  // namespace conelab

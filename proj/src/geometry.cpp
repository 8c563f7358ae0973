#include "conelab/geometry.hpp"

#include <algorithm>

namespace conelab {

std::array<double, 3> SymMat::eigenvalues() const {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    if (dim == 1) {
        e[0] = a[0];
        return e;
    }
    if (dim == 2) {
        // Branch-free closed form; ascending by construction.
        const double m = 0.5 * ((*this)(0, 0) + (*this)(1, 1));
        const double d = 0.5 * ((*this)(0, 0) - (*this)(1, 1));
        const double s = std::sqrt(d * d + (*this)(0, 1) * (*this)(0, 1));
        e[0] = m - s;
        e[1] = m + s;
        return e;
    }
    // dim == 3: cyclic Jacobi on a local copy.
    double m[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = (*this)(i, j);
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
        if (off < 1e-15 * (1.0 + std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2])))
            break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
    }
    e = {m[0][0], m[1][1], m[2][2]};
    std::sort(e.begin(), e.end());
    return e;
}

}  // namespace conelab

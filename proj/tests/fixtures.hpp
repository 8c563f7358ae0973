#pragma once

// Shared fixture palette for contact-transform tests: twenty fields with
// assorted smoothness, kinks, cones and noise.

#include <cmath>

#include "conelab/cones.hpp"
#include "conelab/field.hpp"
#include "conelab/rng.hpp"

namespace conelab::testfix {

inline ScalarField make_fixture(int id, const GridDomain& d, double alpha, Rng& rng) {
    auto sample = [&](auto&& f) { return ScalarField::sample(d, f); };
    const double L = 0.5 * (d.hi[0] - d.lo[0]);
    switch (id % 20) {
        case 0: return ScalarField(d, 0.0);
        case 1: return ScalarField(d, 0.3);
        case 2: return sample([&](const Vec& x) { return 0.4 * x[0] - 0.25 * (d.dim == 2 ? x[1] : 0.0) + 0.1; });
        case 3: return sample([&](const Vec& x) { return 0.5 * x.norm2(); });
        case 4: return sample([&](const Vec& x) { return 0.5 * (x[0] * x[0] - (d.dim == 2 ? x[1] * x[1] : 0.0)); });
        case 5: {
            Cone c{ConeSign::concave, 1.0, d.dim == 2 ? Vec(0.1, -0.2) : Vec(0.1), 0.0, alpha};
            return sample([&](const Vec& x) { return c.value(x); });
        }
        case 6: {
            Cone c{ConeSign::convex, 1.0, d.dim == 2 ? Vec(-0.3, 0.2) : Vec(-0.3), 0.1, alpha};
            return sample([&](const Vec& x) { return c.value(x); });
        }
        case 7: return sample([](const Vec& x) { return x.norm(); });
        case 8: return sample([&](const Vec& x) {
            return 0.3 * std::sin(2.0 * x[0] / L) * (d.dim == 2 ? std::cos(1.5 * x[1] / L) : 1.0);
        });
        case 9: return sample([&](const Vec& x) { return std::pow(x.norm(), 1.0 + alpha); });
        case 10: return sample([&](const Vec& x) { return -std::pow(x.norm(), 1.0 + alpha); });
        case 11: {  // smooth random trigonometric mix
            const double a1 = rng.uniform(-0.3, 0.3), a2 = rng.uniform(-0.3, 0.3);
            const double w1 = rng.uniform(0.5, 2.0), w2 = rng.uniform(0.5, 2.0);
            return sample([&](const Vec& x) {
                return a1 * std::sin(w1 * x[0] + 0.3) +
                       a2 * std::cos(w2 * (d.dim == 2 ? x[1] : x[0]));
            });
        }
        case 12: {  // rough node noise
            ScalarField u(d);
            for (double& v : u.v) v = rng.uniform(-0.2, 0.2);
            return u;
        }
        case 13: {
            Cone c{ConeSign::concave, 0.5, d.dim == 2 ? Vec(0.2, 0.1) : Vec(0.2), 0.0, alpha};
            return sample([&](const Vec& x) { return c.value(x) + 0.3 * x[0]; });
        }
        case 14: {
            Cone a{ConeSign::concave, 1.0, d.dim == 2 ? Vec(-0.4, 0.0) : Vec(-0.4), 0.2, alpha};
            Cone b{ConeSign::concave, 2.0, d.dim == 2 ? Vec(0.5, 0.3) : Vec(0.5), 0.0, alpha};
            return sample([&](const Vec& x) { return std::min(a.value(x), b.value(x)); });
        }
        case 15: return sample([](const Vec& x) { return std::max(0.0, x[0]); });
        case 16: return sample([](const Vec& x) { return 0.5 * std::exp(-4.0 * x.norm2()); });
        case 17: {
            Cone c{ConeSign::concave, 1.5, d.dim == 2 ? Vec(0.0, 0.4) : Vec(0.4), -0.1, alpha};
            return sample([&](const Vec& x) { return c.value(x) - 0.2 * (d.dim == 2 ? x[1] : x[0]); });
        }
        case 18: {
            const Vec c1 = d.dim == 2 ? Vec(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
                                      : Vec(rng.uniform(-0.5, 0.5));
            return sample([&](const Vec& x) { return 0.7 * (x - c1).norm2() - 0.3 * x[0]; });
        }
        default: return sample([&](const Vec& x) {
            return 0.4 * std::exp(-6.0 * (x - (d.dim == 2 ? Vec(0.3, 0.3) : Vec(0.3))).norm2()) -
                   0.3 * std::exp(-8.0 * (x - (d.dim == 2 ? Vec(-0.3, -0.2) : Vec(-0.3))).norm2());
        });
    }
}

}  // namespace conelab::testfix

#pragma once

#include <cstdint>
#include <random>

#include "conelab/geometry.hpp"

namespace conelab {

// Seeded generator with explicit bit-to-double conversion so randomized
// suites produce identical streams on every platform (std distributions
// are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    std::uint64_t bits() { return eng_(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double normal() {
        // Box-Muller; cache the second value
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }
    Vec vec(int dim, double a, double b) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = uniform(a, b);
        return v;
    }
    SymMat sym(int dim, double scale) {
        SymMat m(dim);
        for (int j = 0; j < dim; ++j)
            for (int i = 0; i <= j; ++i) m(i, j) = scale * (2.0 * uniform01() - 1.0);
        return m;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace conelab

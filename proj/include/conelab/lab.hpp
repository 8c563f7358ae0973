#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conelab/config.hpp"
#include "conelab/contact.hpp"
#include "conelab/field.hpp"
#include "conelab/solver.hpp"

namespace conelab {

// a = 16 ||u||_inf + (||f||_{L^n} / eps1)^(1/(1+gamma)) + eps_pad;
// u~ = u/a, f~ = f/a^(1+gamma). Norms are taken over the whole box,
// which plays the role of the outer ball.
struct NormalizeResult {
    ScalarField u;
    ScalarField f;
    double a = 1.0;
};

NormalizeResult normalize(const ScalarField& u, const ScalarField& f, double gamma,
                          double eps1, double eps_pad);

struct DensityResult {
    double fraction = 0.0;
    bool passed = false;
    double threshold = 0.0;
    double oscillation = 0.0;
};

// fraction = |B1 cap T-_1 cap {M(|f|^n) <= eps}| / |B1| with vertices over
// the whole box. Requires osc(u) <= 1/8 over the box.
DensityResult density_check(const ScalarField& u, const ScalarField& f, double gamma,
                            double eps, const RegionMask& B1, double pass_threshold,
                            int threads = 1);

struct W1DeltaOptions {
    double K_min = 0.25;
    double M = 2.0;
    int k_max = 16;
    double max_censored_fraction = 0.05;
    int threads = 1;
};

struct W1DeltaReport {
    double left_stress = 0.0;          // seminorm + L^delta norm of V(Du) on B_half
    double left_stress_seminorm = 0.0; // the derivative part alone
    double left_g = 0.0;               // lp_norm(g, delta) on B_half
    double right = 0.0;         // ||u||_inf(B1)^(1+gamma) + ||f||_{L^n}(B1)
    double ratio = 0.0;         // left_stress / right
    double censored_fraction = 0.0;
    double delta = 0.0;
};

W1DeltaReport w1delta_verify(const ScalarField& u, const ScalarField& f, double gamma,
                             double delta, const RegionMask& B_half, const RegionMask& B1,
                             const W1DeltaOptions& opts = {});

enum class Provenance { paper, trivial, derived };

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    Provenance provenance = Provenance::trivial;
    std::string note;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Fast built-in identity suite driven by a seed (pucci algebra, stress
// identities, cone calculus, dyadic bracketing, normalization scaling).
VerifyReport builtin_verify_suite(std::uint64_t seed);

// Runs one experiment described by the config. Writes summary.json plus
// experiment-specific CSV/.fld files into out_dir.
// Returns 0 when all checks passed, 1 when some check failed.
// Configuration or runtime problems throw (the CLI maps them to exit 2).
int run_experiment(const Config& cfg, const std::string& kind, const std::string& out_dir,
                   std::uint64_t seed, int threads);

const char* provenance_name(Provenance p);

}  // namespace conelab

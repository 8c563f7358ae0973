// conelab CLI: thin client of the C API.
//   conelab <kind> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
// Exit codes: 0 all checks passed, 1 checks failed, 2 configuration or
// runtime error.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"

#include "conelab/conelab.h"

int main(int argc, char** argv) {
    CLI::App app{"conelab: grid laboratory for degenerate elliptic contact-set experiments"};
    app.set_version_flag("--version", std::string(conelab_version()));

    std::string kind;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 0;

    app.add_option("kind", kind, "experiment kind: solve|contact|decay|seminorm|verify|density")
        ->required();
    app.add_option("--config", config_path, "configuration file (key = value lines)")
        ->required();
    app.add_option("--out", out_dir, "output directory (default: out)");
    app.add_option("--seed", seed, "seed for randomized suites (default: 0)");
    app.add_option("--threads", threads,
                   "worker threads (default: CONELAB_THREADS or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (threads == 0) {
        if (const char* env = std::getenv("CONELAB_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0) threads = static_cast<unsigned>(v);
        }
    }
    if (threads == 0) threads = 1;

    conelab_config* cfg = nullptr;
    conelab_status st = conelab_config_load(config_path.c_str(), &cfg);
    if (st != CONELAB_OK) {
        std::fprintf(stderr, "conelab: %s\n", conelab_last_error());
        return 2;
    }

    conelab_run_stats stats{};
    st = conelab_run(cfg, kind.c_str(), out_dir.c_str(), seed, threads, &stats);
    conelab_config_free(cfg);

    if (st == CONELAB_OK) {
        std::fprintf(stderr, "conelab: %u/%u checks passed, outputs in %s\n",
                     stats.checks_passed, stats.checks_total, out_dir.c_str());
        return 0;
    }
    if (st == CONELAB_ERR_CHECKS_FAILED) {
        std::fprintf(stderr, "conelab: %u/%u checks passed (failures above), outputs in %s\n",
                     stats.checks_passed, stats.checks_total, out_dir.c_str());
        return 1;
    }
    std::fprintf(stderr, "conelab: error: %s\n", conelab_last_error());
    return 2;
}

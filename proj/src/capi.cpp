#include "conelab/conelab.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "conelab/config.hpp"
#include "conelab/io.hpp"
#include "conelab/lab.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

struct ConfigWrap {
    conelab::Config cfg;
};

conelab_status classify(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const std::invalid_argument*>(&e)) return CONELAB_ERR_CONFIG;
    if (dynamic_cast<const std::ios_base::failure*>(&e)) return CONELAB_ERR_IO;
    return CONELAB_ERR_RUNTIME;
}

}  // namespace

extern "C" {

struct conelab_config : ConfigWrap {};

const char* conelab_version(void) { return "0.1.0"; }

const char* conelab_last_error(void) { return g_last_error.c_str(); }

conelab_status conelab_config_create(conelab_config** out) {
    if (!out) {
        set_error("conelab_config_create: out must not be NULL");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    *out = new conelab_config();
    return CONELAB_OK;
}

conelab_status conelab_config_load(const char* path, conelab_config** out) {
    if (!path || !out) {
        set_error("conelab_config_load: path and out must not be NULL");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    try {
        auto* cfg = new conelab_config();
        cfg->cfg = conelab::Config::parse_file(path);
        *out = cfg;
        return CONELAB_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return CONELAB_ERR_CONFIG;
    }
}

conelab_status conelab_config_set(conelab_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        set_error("conelab_config_set: NULL argument");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    cfg->cfg.set(key, value);
    return CONELAB_OK;
}

conelab_status conelab_config_get(const conelab_config* cfg, const char* key, char* buf,
                                  size_t buflen) {
    if (!cfg || !key || !buf || buflen == 0) {
        set_error("conelab_config_get: NULL argument");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    if (!cfg->cfg.has(key)) {
        set_error(std::string("conelab_config_get: no such key '") + key + "'");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    const std::string v = cfg->cfg.get_string(key, "");
    std::strncpy(buf, v.c_str(), buflen - 1);
    buf[buflen - 1] = '\0';
    return CONELAB_OK;
}

void conelab_config_free(conelab_config* cfg) { delete cfg; }

conelab_status conelab_run(const conelab_config* cfg, const char* kind, const char* out_dir,
                           uint64_t seed, uint32_t threads, conelab_run_stats* stats) {
    if (!cfg || !kind || !out_dir) {
        set_error("conelab_run: NULL argument");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    try {
        const int rc = conelab::run_experiment(cfg->cfg, kind, out_dir,
                                               static_cast<std::uint64_t>(seed),
                                               static_cast<int>(threads == 0 ? 1 : threads));
        if (stats) {
            // recover counts from the summary written by the run
            stats->checks_total = 0;
            stats->checks_passed = 0;
            std::ifstream is(std::string(out_dir) + "/summary.json");
            if (is) {
                nlohmann::json j;
                is >> j;
                if (j.contains("checks")) {
                    for (const auto& c : j["checks"]) {
                        ++stats->checks_total;
                        if (c.value("status", "") == "pass") ++stats->checks_passed;
                    }
                }
            }
        }
        return rc == 0 ? CONELAB_OK : CONELAB_ERR_CHECKS_FAILED;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

conelab_status conelab_field_probe(const char* path, conelab_field_info* out) {
    if (!path || !out) {
        set_error("conelab_field_probe: NULL argument");
        return CONELAB_ERR_INVALID_ARGUMENT;
    }
    try {
        const conelab::ScalarField u = conelab::read_field(path);
        out->dim = static_cast<uint32_t>(u.dom.dim);
        for (int a = 0; a < 2; ++a) {
            out->n_pts[a] = a < u.dom.dim ? static_cast<uint32_t>(u.dom.n[static_cast<std::size_t>(a)]) : 0;
            out->lo[a] = a < u.dom.dim ? u.dom.lo[static_cast<std::size_t>(a)] : 0.0;
            out->hi[a] = a < u.dom.dim ? u.dom.hi[static_cast<std::size_t>(a)] : 0.0;
        }
        double mn = u.v.empty() ? 0.0 : u.v[0], mx = mn;
        for (double x : u.v) {
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        out->min_value = mn;
        out->max_value = mx;
        return CONELAB_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return CONELAB_ERR_IO;
    }
}

}  // extern "C"

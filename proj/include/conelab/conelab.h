/* conelab C API: experiment runner and field-container access behind a
 * stable extern "C" surface. All functions return conelab_status; string
 * results use caller-provided buffers. Error details are available from
 * conelab_last_error() on the failing thread. */

#ifndef CONELAB_CONELAB_H
#define CONELAB_CONELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CONELAB_API __declspec(dllexport)
#else
#define CONELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum conelab_status {
    CONELAB_OK = 0,
    CONELAB_ERR_INVALID_ARGUMENT = 1,
    CONELAB_ERR_CONFIG = 2,
    CONELAB_ERR_IO = 3,
    CONELAB_ERR_CHECKS_FAILED = 4,
    CONELAB_ERR_RUNTIME = 5
} conelab_status;

typedef struct conelab_config conelab_config; /* opaque */

typedef struct conelab_run_stats {
    uint32_t checks_total;
    uint32_t checks_passed;
} conelab_run_stats;

typedef struct conelab_field_info {
    uint32_t dim;
    uint32_t n_pts[2];
    double lo[2];
    double hi[2];
    double min_value;
    double max_value;
} conelab_field_info;

CONELAB_API const char* conelab_version(void);

/* Message for the most recent failure on the calling thread. */
CONELAB_API const char* conelab_last_error(void);

CONELAB_API conelab_status conelab_config_create(conelab_config** out);
CONELAB_API conelab_status conelab_config_load(const char* path, conelab_config** out);
CONELAB_API conelab_status conelab_config_set(conelab_config* cfg, const char* key,
                                              const char* value);
CONELAB_API conelab_status conelab_config_get(const conelab_config* cfg, const char* key,
                                              char* buf, size_t buflen);
CONELAB_API void conelab_config_free(conelab_config* cfg);

/* Runs one experiment kind (solve|contact|decay|seminorm|verify|density)
 * into out_dir. stats may be NULL. Returns CONELAB_OK when every check
 * passed, CONELAB_ERR_CHECKS_FAILED when the experiment ran but a check
 * failed, other codes on configuration/runtime errors. */
CONELAB_API conelab_status conelab_run(const conelab_config* cfg, const char* kind,
                                       const char* out_dir, uint64_t seed, uint32_t threads,
                                       conelab_run_stats* stats);

/* Reads the header and value range of a binary field container. */
CONELAB_API conelab_status conelab_field_probe(const char* path, conelab_field_info* out);

#ifdef __cplusplus
}
#endif

#endif /* CONELAB_CONELAB_H */

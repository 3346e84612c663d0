/* Textured Gaussian splatting engine: C API.
 *
 * All functions return ts_status; ts_last_error() describes the most recent
 * failure on the calling thread. Handles are opaque and must be released
 * with their destroy/close function.
 */
#ifndef TEXSPLAT_H
#define TEXSPLAT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
    TS_OK = 0,
    TS_ERROR_INVALID_ARGUMENT = 1,
    TS_ERROR_IO = 2,
    TS_ERROR_PARSE = 3,
    TS_ERROR_NUMERIC = 4,
    TS_ERROR_INTERNAL = 5
} ts_status;

typedef struct ts_config_t ts_config_t;
typedef struct ts_model_t ts_model_t;

const char* ts_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* ts_last_error(void);

/* ---- configuration ----------------------------------------------------- */

ts_status ts_config_create(ts_config_t** out);
void ts_config_destroy(ts_config_t* cfg);

/* key = value lines, '#' comments. Unknown keys are rejected. */
ts_status ts_config_load_file(ts_config_t* cfg, const char* path);
ts_status ts_config_set(ts_config_t* cfg, const char* key, const char* value);
ts_status ts_config_get(const ts_config_t* cfg, const char* key, char* buf, size_t cap);

/* Schema introspection; drives CLI flags and --help so that config keys and
 * command-line flags stay bijective. */
size_t ts_config_key_count(void);
ts_status ts_config_key_info(size_t index, const char** key, const char** flag, const char** type,
                             const char** default_value, const char** help);

/* ---- training ----------------------------------------------------------- */

typedef struct ts_train_summary_t {
    double final_loss;
    double final_psnr;
    double final_ssim;
    uint64_t n_gaussians;
    int32_t tex_res;
} ts_train_summary_t;

/* Runs the two-stage pipeline; writes checkpoint, loss curve, and validation
 * renders under the configured output directory. summary may be NULL. */
ts_status ts_train(const ts_config_t* cfg, ts_train_summary_t* summary);

/* ---- checkpoints -------------------------------------------------------- */

typedef struct ts_model_stats_t {
    uint64_t n_gaussians;
    uint64_t texel_count;
    uint64_t model_bytes; /* float32 parameter payload estimate */
    int32_t tex_res;
    int32_t sh_degree;
    char variant[8]; /* none | alpha | rgb | rgba */
} ts_model_stats_t;

ts_status ts_model_open(const char* checkpoint_dir, ts_model_t** out);
void ts_model_close(ts_model_t* model);
ts_status ts_model_stats(const ts_model_t* model, ts_model_stats_t* stats);

/* ---- rendering / evaluation / diagnostics ------------------------------- */

/* One PNG per camera of the configured split (or "orbit" poses when the
 * orbit key is nonzero); "decompose" additionally writes base/tex images. */
ts_status ts_render(const ts_model_t* model, const ts_config_t* cfg);

typedef struct ts_eval_summary_t {
    double mean_psnr;
    double mean_ssim;
    uint64_t n_images;
} ts_eval_summary_t;

/* Renders the configured split and writes metrics.csv / metrics.json under
 * the output directory. summary may be NULL. */
ts_status ts_eval(const ts_model_t* model, const ts_config_t* cfg, ts_eval_summary_t* summary);

typedef struct ts_diag_summary_t {
    double mean_effective_rank;
    double flat_fraction; /* effective rank within [1.9, 2.1] */
} ts_diag_summary_t;

/* Writes the effective-rank histogram CSV and summary JSON. */
ts_status ts_diag(const ts_model_t* model, const ts_config_t* cfg, ts_diag_summary_t* summary);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TEXSPLAT_H */

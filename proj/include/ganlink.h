/* C interface to the link-optimizer library. All entry points return a
 * gl_status; on failure gl_last_error() holds a human-readable message for
 * the calling thread. Handles are opaque and freed with their matching
 * *_free function. */
#ifndef GANLINK_H
#define GANLINK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_CONFIG_ERROR = 1,   /* bad key, value, file or constraint violation */
  GL_USAGE_ERROR = 2,    /* precondition violated by the caller */
  GL_SHAPE_ERROR = 3,    /* mismatched tensor/sequence dimensions */
  GL_NUMERIC_ERROR = 4,  /* non-finite values in training or evaluation */
  GL_IO_ERROR = 5,       /* filesystem or checkpoint-format failure */
  GL_TRAINING_ERROR = 6, /* a training stage missed its contract */
  GL_UNKNOWN_ERROR = 7
} gl_status;

/* Library version, "major.minor.patch". */
const char* gl_version(void);

/* Message of the most recent failing call on this thread; never NULL. */
const char* gl_last_error(void);

/* INI document listing every configuration key with defaults and comments. */
const char* gl_schema(void);

/* ---- configuration ------------------------------------------------------ */

typedef struct gl_config gl_config;

gl_status gl_config_default(gl_config** out);
gl_status gl_config_load(const char* path, gl_config** out);
/* Dotted keys, e.g. gl_config_set(c, "gan.memory", "3"). */
gl_status gl_config_set(gl_config* cfg, const char* key, const char* value);
gl_status gl_config_get(const gl_config* cfg, const char* key, char* buffer, size_t buffer_size);
/* Cross-key validation; gl_config_set alone only checks the single key. */
gl_status gl_config_validate(const gl_config* cfg);
void gl_config_free(gl_config* cfg);

/* ---- experiments -------------------------------------------------------- */

typedef struct gl_run_summary {
  double initial_ber;
  double final_ber;
  double final_q2_db;
  double baseline_ber;
  double baseline_q2_db;
  double q2_delta_db; /* end-to-end minus receiver-only */
  double calibrated_noise_sigma;
  int32_t iterations;
} gl_run_summary;

typedef struct gl_eval_result {
  double ser;
  double ber;
  double q2_db;
} gl_eval_result;

/* Full experiment; artifacts land in out_dir. summary may be NULL. */
gl_status gl_run(const gl_config* cfg, const char* out_dir, gl_run_summary* summary);

/* Offline pretraining; writes out_dir/pretrained.bin. final_ser may be NULL. */
gl_status gl_pretrain(const gl_config* cfg, const char* out_dir, double* final_ser);

/* GAN training on a dumped dataset (a dataset_k0.bin from a run); writes
 * out_dir/gan.bin. d_loss/g_loss may be NULL. */
gl_status gl_train_gan(const gl_config* cfg, const char* dataset_path, const char* out_dir,
                       double* d_loss, double* g_loss);

/* Receiver-only arm from a tx/rx checkpoint; writes out_dir/baseline.json
 * and out_dir/baseline_rx.bin. result may be NULL. */
gl_status gl_baseline_rx(const gl_config* cfg, const char* checkpoint_path, const char* out_dir,
                         gl_eval_result* result);

/* BER/SER/Q^2 of a tx/rx checkpoint over the configured link. */
gl_status gl_evaluate(const gl_config* cfg, const char* checkpoint_path, gl_eval_result* result);

/* Rebuild metrics.csv and the SVG plots from metrics.jsonl and
 * report_data.bin inside out_dir. */
gl_status gl_report(const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GANLINK_H */

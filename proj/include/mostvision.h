/* C API for the mostvision experiment pipeline.
 *
 * All functions are exported by the libmostvision shared library. Stages
 * operate on an opaque context created from a JSON config string; errors
 * come back as status codes, with the message retained on the context.
 */
#ifndef MOSTVISION_H_
#define MOSTVISION_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mv_context mv_context;

/* Status codes double as CLI exit codes. */
typedef enum mv_status {
  MV_OK = 0,
  MV_ERROR = 1,                  /* I/O, data, or other failure */
  MV_CONFIG_ERROR = 2,
  MV_STAGE_DEPENDENCY_ERROR = 3, /* a required earlier stage has not run */
  MV_NUMERIC_ERROR = 4,          /* fit/regression/placement failure */
} mv_status;

/* Parses and validates config_json (see README for the schema; pass NULL or
 * "" for defaults) and returns a context through out_ctx. */
mv_status mv_context_create(const char* config_json, mv_context** out_ctx);

void mv_context_destroy(mv_context* ctx);

/* Message for the most recent failing call on this context. The pointer
 * stays valid until the next call on the same context. */
const char* mv_last_error(const mv_context* ctx);

/* Pipeline stages. model_selector is a comma-separated list of model ids
 * ("vgg7,ram4"), or NULL / "all" for every configured model. */
mv_status mv_generate(mv_context* ctx);
mv_status mv_train(mv_context* ctx, const char* model_selector);
mv_status mv_eval(mv_context* ctx, const char* model_selector);
mv_status mv_analyze(mv_context* ctx);
mv_status mv_plot(mv_context* ctx);
mv_status mv_run_all(mv_context* ctx);

/* Combined SHA-256 over the generated dataset (hex, 64 chars + NUL).
 * Fails with MV_STAGE_DEPENDENCY_ERROR when no dataset exists. */
mv_status mv_dataset_hash(mv_context* ctx, char* buf, size_t buf_size);

/* Default config as pretty-printed JSON. Returns the number of bytes
 * (excluding the NUL) that were or would be written. */
size_t mv_default_config(char* buf, size_t buf_size);

const char* mv_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MOSTVISION_H_ */

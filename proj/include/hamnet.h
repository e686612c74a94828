/* C interface to the hamnet signal pipeline.
 *
 * Handles are opaque and owned by the caller once returned; release them
 * with the matching *_free function. Every fallible call returns a
 * hamnet_status; on failure hamnet_last_error() describes the most recent
 * error on the calling thread. Strings returned through char** are owned by
 * the caller and released with hamnet_string_free. */
#ifndef HAMNET_H
#define HAMNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(HAMNET_BUILDING_LIBRARY)
#define HAMNET_API __attribute__((visibility("default")))
#else
#define HAMNET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hamnet_status {
  HAMNET_OK = 0,
  HAMNET_E_PARAMETER = 1,
  HAMNET_E_CONFIG = 2,
  HAMNET_E_VALIDATION = 3,
  HAMNET_E_IO = 4,
  HAMNET_E_FORMAT_MAGIC = 5,
  HAMNET_E_FORMAT_VERSION = 6,
  HAMNET_E_FORMAT_TRUNCATED = 7,
  HAMNET_E_FORMAT = 8,
  HAMNET_E_UNSUPPORTED = 9,
  HAMNET_E_TRAINING = 10,
  HAMNET_E_INTERNAL = 11
} hamnet_status;

typedef struct hamnet_buffer hamnet_buffer;
typedef struct hamnet_model hamnet_model;

HAMNET_API const char* hamnet_version(void);
/* Stable lowercase name such as "format_magic"; "unknown" for out-of-range values. */
HAMNET_API const char* hamnet_status_name(hamnet_status status);
/* Message of the last failure on this thread; "" after a success. Valid until the next call. */
HAMNET_API const char* hamnet_last_error(void);
HAMNET_API void hamnet_string_free(char* s);

/* Runs a pipeline command (synth, augment, clean, train, eval, denoise,
 * classify, kfold) with a JSON object config. On success *result_json, if
 * result_json is non-null, receives the command summary as JSON. */
HAMNET_API hamnet_status hamnet_run_command(const char* command, const char* config_json, char** result_json);

/* ---- sample buffers ---- */
HAMNET_API hamnet_status hamnet_buffer_create(const double* samples, size_t n, int sample_rate, hamnet_buffer** out);
/* Reads a WAV file, or raw little-endian float32 at raw_sample_rate for other extensions. */
HAMNET_API hamnet_status hamnet_buffer_read(const char* path, int raw_sample_rate, hamnet_buffer** out);
HAMNET_API hamnet_status hamnet_buffer_write_wav(const hamnet_buffer* buf, const char* path);
/* Renders one synthetic segment; snr_db is ignored when noisy is 0. */
HAMNET_API hamnet_status hamnet_synth_signal(const char* signal_class, double duration_s, int sample_rate,
                                             uint64_t seed, int noisy, double snr_db, hamnet_buffer** out);
HAMNET_API size_t hamnet_buffer_size(const hamnet_buffer* buf);
HAMNET_API int hamnet_buffer_sample_rate(const hamnet_buffer* buf);
/* Borrowed pointer to the samples, valid while buf lives. */
HAMNET_API const double* hamnet_buffer_data(const hamnet_buffer* buf);
HAMNET_API void hamnet_buffer_free(hamnet_buffer* buf);

/* ---- models ---- */
HAMNET_API hamnet_status hamnet_model_load(const char* path, hamnet_model** out);
HAMNET_API hamnet_status hamnet_model_save(const hamnet_model* model, const char* path);
/* "classify" or "denoise"; borrowed static string. */
HAMNET_API const char* hamnet_model_task(const hamnet_model* model);
/* *label is borrowed from the model handle and valid while it lives. */
HAMNET_API hamnet_status hamnet_model_classify(const hamnet_model* model, const hamnet_buffer* input,
                                               const char** label, double* score);
HAMNET_API hamnet_status hamnet_model_denoise(const hamnet_model* model, const hamnet_buffer* input,
                                              hamnet_buffer** out);
HAMNET_API void hamnet_model_free(hamnet_model* model);

#ifdef __cplusplus
}
#endif

#endif /* HAMNET_H */

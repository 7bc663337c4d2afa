/* Copyright 2026 The TEAdapter Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the TEAdapter engine. Every fallible call returns a status;
 * on failure teadapter_last_error() holds a message for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * teadapter_string_free. Handles are released with their *_free function;
 * passing NULL to any *_free is a no-op.
 */
#ifndef TEADAPTER_TEADAPTER_H
#define TEADAPTER_TEADAPTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(TEADAPTER_BUILDING_LIBRARY)
#define TEADAPTER_API __attribute__((visibility("default")))
#else
#define TEADAPTER_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum teadapter_status {
    TEADAPTER_OK = 0,
    TEADAPTER_E_EMPTY_INPUT,
    TEADAPTER_E_INVALID_AUDIO,
    TEADAPTER_E_KERNEL_TOO_LARGE,
    TEADAPTER_E_INVALID_WIDTH,
    TEADAPTER_E_K_TOO_LARGE,
    TEADAPTER_E_TOO_SHORT,
    TEADAPTER_E_NO_BEATS,
    TEADAPTER_E_PITCH_OUT_OF_RANGE,
    TEADAPTER_E_INVALID_ARGUMENT,
    TEADAPTER_E_SHAPE,
    TEADAPTER_E_INVALID_LOSS,
    TEADAPTER_E_STEP,
    TEADAPTER_E_CONTRACT_VIOLATION,
    TEADAPTER_E_NOT_LOADED,
    TEADAPTER_E_UNDEFINED,
    TEADAPTER_E_INSUFFICIENT_BEATS,
    TEADAPTER_E_INGEST,
    TEADAPTER_E_DECODE,
    TEADAPTER_E_CACHE_COLLISION,
    TEADAPTER_E_IO,
    TEADAPTER_E_SCHEMA,
    TEADAPTER_E_INTERNAL
} teadapter_status;

typedef struct teadapter_audio teadapter_audio;
typedef struct teadapter_model teadapter_model;
typedef struct teadapter_adapter teadapter_adapter;

/* Called once per training step. */
typedef void (*teadapter_progress_fn)(int step, double loss, void* user);

TEADAPTER_API const char* teadapter_version(void);
/* "NotLoaded", "SchemaError", ... */
TEADAPTER_API const char* teadapter_status_name(teadapter_status status);
/* Message of the last failed call on this thread; "" if none. */
TEADAPTER_API const char* teadapter_last_error(void);
TEADAPTER_API void teadapter_string_free(char* text);

/* --- audio ------------------------------------------------------------- */

TEADAPTER_API teadapter_status teadapter_audio_read(const char* path, teadapter_audio** out);
/* 16-bit PCM WAV. */
TEADAPTER_API teadapter_status teadapter_audio_write(const teadapter_audio* audio, const char* path);
TEADAPTER_API teadapter_status teadapter_audio_from_samples(const double* samples, size_t count, double sample_rate,
                                                            teadapter_audio** out);
TEADAPTER_API size_t teadapter_audio_length(const teadapter_audio* audio);
TEADAPTER_API double teadapter_audio_sample_rate(const teadapter_audio* audio);
TEADAPTER_API const double* teadapter_audio_samples(const teadapter_audio* audio);
/* Scales to the given peak; silence stays silent. */
TEADAPTER_API teadapter_status teadapter_audio_normalize(teadapter_audio* audio, double peak);
TEADAPTER_API void teadapter_audio_free(teadapter_audio* audio);

/* --- analysis ---------------------------------------------------------- */

/* kind: "melody", "chords" or "beats". Writes the versioned JSON document. */
TEADAPTER_API teadapter_status teadapter_extract(const teadapter_audio* audio, const char* kind, char** json);
/* Checks a document against the schema named by its "schema" field. */
TEADAPTER_API teadapter_status teadapter_validate_json(const char* json);

/* --- corpus ------------------------------------------------------------ */

/* Synthetic clips with labels, ground-truth melodies and a manifest, sized for
 * the model config at config_path (NULL: desk defaults). section may be NULL
 * to cycle intro/chorus/outro, instrument NULL to draw per clip. */
TEADAPTER_API teadapter_status teadapter_synth_corpus(const char* dir, const char* config_path, int count,
                                                      const char* section, const char* instrument, uint64_t seed,
                                                      char** manifest_path);

/* --- backbone ---------------------------------------------------------- */

/* Fresh, untrained backbone from a config file (NULL: desk defaults). */
TEADAPTER_API teadapter_status teadapter_model_create(const char* config_path, uint64_t seed, teadapter_model** out);
/* Loads a saved backbone; config_path (may be NULL) only adds timbre profiles. */
TEADAPTER_API teadapter_status teadapter_model_load(const char* dir, const char* config_path, teadapter_model** out);
TEADAPTER_API teadapter_status teadapter_model_save(teadapter_model* model, const char* dir);
/* Fits latent statistics on the manifest's clips and pretrains the backbone;
 * steps <= 0 uses the config value. The backbone is frozen afterwards. */
TEADAPTER_API teadapter_status teadapter_model_pretrain(teadapter_model* model, const char* manifest_path, int steps,
                                                        uint64_t seed, teadapter_progress_fn progress, void* user,
                                                        double* final_loss);
TEADAPTER_API teadapter_status teadapter_model_info(teadapter_model* model, char** json);
TEADAPTER_API void teadapter_model_free(teadapter_model* model);

/* --- adapters ---------------------------------------------------------- */

/* condition: "melody", "melody_instr" or "chord". section: "intro", "chorus",
 * "outro" restricts training to clips with that label; NULL trains a generic
 * adapter on every clip. steps <= 0 uses the config value. */
TEADAPTER_API teadapter_status teadapter_adapter_train(teadapter_model* model, const char* manifest_path,
                                                       const char* condition, const char* section, int steps,
                                                       uint64_t seed, teadapter_progress_fn progress, void* user,
                                                       teadapter_adapter** out, double* final_loss);
TEADAPTER_API teadapter_status teadapter_adapter_load(const char* dir, teadapter_adapter** out);
TEADAPTER_API teadapter_status teadapter_adapter_save(teadapter_adapter* adapter, const char* dir);
/* {"condition": ..., "section": ..., "parameters": n, ...} */
TEADAPTER_API teadapter_status teadapter_adapter_info(teadapter_adapter* adapter, char** json);
TEADAPTER_API void teadapter_adapter_free(teadapter_adapter* adapter);

/* --- generation -------------------------------------------------------- */

typedef struct teadapter_teacher {
    const teadapter_audio* audio;
    teadapter_adapter* adapter;  /* its condition type selects the control */
    double weight;
    const char* instrument;      /* melody_instr timbre; NULL: neutral */
} teadapter_teacher;

/* mode: "major", "minor" or NULL; tempo_bpm <= 0 for none. */
TEADAPTER_API teadapter_status teadapter_generate(teadapter_model* model, const char* prompt, const char* mode,
                                                  int tempo_bpm, const teadapter_teacher* teachers,
                                                  size_t teacher_count, uint64_t seed, teadapter_audio** out);

/* Generates a plan/v1 file section by section with the adapters in
 * adapter_dirs (matched by section and condition tags) and inpaints the
 * junctions unless inpaint is 0. report receives junction frames and
 * smoothness before and after; it may be NULL. */
TEADAPTER_API teadapter_status teadapter_compose(teadapter_model* model, const char* plan_path,
                                                 const char* const* adapter_dirs, size_t adapter_count,
                                                 uint64_t seed, int inpaint, teadapter_audio** out, char** report);

/* --- evaluation -------------------------------------------------------- */

/* Scores every WAV in gen_dir against the same-named WAV in ref_dir. json
 * receives the report/v1 document; csv (may be NULL) the per-clip rows. */
TEADAPTER_API teadapter_status teadapter_evaluate(const char* gen_dir, const char* ref_dir, char** json, char** csv);

/* Summary of a backbone or adapter checkpoint directory. */
TEADAPTER_API teadapter_status teadapter_inspect_checkpoint(const char* dir, char** json);

#ifdef __cplusplus
}
#endif

#endif /* TEADAPTER_TEADAPTER_H */

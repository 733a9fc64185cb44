/* C interface of the relrep library. All handles are opaque; every fallible
 * call returns a relrep_status and leaves a message retrievable with
 * relrep_last_error() on the calling thread. */
#ifndef RELREP_RELREP_H
#define RELREP_RELREP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RELREP_BUILDING)
#    define RELREP_API __declspec(dllexport)
#  else
#    define RELREP_API __declspec(dllimport)
#  endif
#else
#  define RELREP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum relrep_status {
    RELREP_OK = 0,
    RELREP_DIMENSION_MISMATCH = 1,
    RELREP_ZERO_NORM_VECTOR = 2,
    RELREP_NON_FINITE = 3,
    RELREP_DISCONNECTED_GRAPH = 4,
    RELREP_BAD_K = 5,
    RELREP_BAD_INDEX = 6,
    RELREP_TOO_MANY_ANCHORS = 7,
    RELREP_DUPLICATE_KIND = 8,
    RELREP_BAD_LABEL = 9,
    RELREP_MISSING_CACHE = 10,
    RELREP_BAD_SHAPE = 11,
    RELREP_WRONG_KIND = 12,
    RELREP_DEGENERATE_INPUT = 13,
    RELREP_MISMATCHED_OPERANDS = 14,
    RELREP_ZERO_END_TO_END = 15,
    RELREP_SINGULAR_MATRIX = 16,
    RELREP_BAD_DIM = 17,
    RELREP_BAD_SIZE = 18,
    RELREP_BAD_CONFIG = 19,
    RELREP_PARSE_ERROR = 20,
    RELREP_RAGGED_ROWS = 21,
    RELREP_IO_ERROR = 22,
    RELREP_UNKNOWN_NAME = 23,
    RELREP_INVALID_ARGUMENT = 98,
    RELREP_INTERNAL = 99
} relrep_status;

typedef struct relrep_matrix relrep_matrix;
typedef struct relrep_config relrep_config;
typedef struct relrep_artifacts relrep_artifacts;

RELREP_API const char* relrep_version(void);
RELREP_API const char* relrep_status_name(relrep_status status);
/* Message of the last failed call on this thread; "" after a success. */
RELREP_API const char* relrep_last_error(void);

/* Row-major rows x cols copy of data. */
RELREP_API relrep_status relrep_matrix_create(size_t rows, size_t cols, const double* data, relrep_matrix** out);
RELREP_API void relrep_matrix_destroy(relrep_matrix* m);
RELREP_API size_t relrep_matrix_rows(const relrep_matrix* m);
RELREP_API size_t relrep_matrix_cols(const relrep_matrix* m);
/* Copies the entries row-major into out, which holds rows * cols doubles. */
RELREP_API relrep_status relrep_matrix_copy(const relrep_matrix* m, double* out);
RELREP_API relrep_status relrep_matrix_load_csv(const char* path, relrep_matrix** out);
RELREP_API relrep_status relrep_matrix_save_csv(const relrep_matrix* m, const char* path);

/* Similarity of two vectors under a kind such as "cosine" or "chebyshev:p=64". */
RELREP_API relrep_status relrep_score(const char* kind, const double* u, const double* v, size_t dim, double* out);
/* Relative representation of every row of z with respect to every row of
 * anchors (n x |A| result). */
RELREP_API relrep_status relrep_relative_projection(const relrep_matrix* z, const relrep_matrix* anchors,
                                                    const char* kind, relrep_matrix** out);
RELREP_API relrep_status relrep_linear_cka(const relrep_matrix* x, const relrep_matrix* y, double* out);

/* Built-in defaults; see relrep_config_to_json for the full schema. */
RELREP_API relrep_status relrep_config_default(relrep_config** out);
RELREP_API relrep_status relrep_config_load(const char* path, relrep_config** out);
RELREP_API relrep_status relrep_config_parse(const char* json, relrep_config** out);
RELREP_API void relrep_config_destroy(relrep_config* cfg);
/* Caller frees the string with relrep_string_free. */
RELREP_API relrep_status relrep_config_to_json(const relrep_config* cfg, char** out);
RELREP_API relrep_status relrep_config_set_seed(relrep_config* cfg, uint64_t seed);
RELREP_API relrep_status relrep_config_set_kinds(relrep_config* cfg, const char* comma_separated);
RELREP_API relrep_status relrep_config_set_anchor_count(relrep_config* cfg, size_t count);
RELREP_API relrep_status relrep_config_set_aggregator(relrep_config* cfg, const char* name);
RELREP_API relrep_status relrep_config_set_jobs(relrep_config* cfg, int jobs);
RELREP_API void relrep_string_free(char* s);

/* Number of commands and their names (static storage). */
RELREP_API size_t relrep_command_count(void);
RELREP_API const char* relrep_command_name(size_t i);

/* Runs a command: invariance, project, aggregate, similarity, stitch,
 * ablate-anchors, finetune-qkv or geodesic-demo. inputs may be NULL when
 * input_count is 0. */
RELREP_API relrep_status relrep_run(const char* command, const relrep_config* cfg, const relrep_matrix* const* inputs,
                                    size_t input_count, relrep_artifacts** out);
RELREP_API size_t relrep_artifacts_count(const relrep_artifacts* a);
RELREP_API const char* relrep_artifacts_name(const relrep_artifacts* a, size_t i);
/* Content of artifact i; *size receives its length in bytes. */
RELREP_API const char* relrep_artifacts_data(const relrep_artifacts* a, size_t i, size_t* size);
/* Creates dir if needed and writes every artifact into it. */
RELREP_API relrep_status relrep_artifacts_write(const relrep_artifacts* a, const char* dir);
RELREP_API void relrep_artifacts_destroy(relrep_artifacts* a);

#ifdef __cplusplus
}
#endif

#endif

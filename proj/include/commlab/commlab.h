/* C interface to the commlab library. All functions return a cl_status;
 * on failure cl_last_error() describes the problem (thread local). Strings
 * returned through char** are heap allocated and released with
 * cl_string_free. Parameter indices are 1-based throughout. */
#ifndef COMMLAB_H
#define COMMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CL_API __declspec(dllexport)
#else
#define CL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CL_OK = 0,
  CL_INVALID_ARGUMENT = 1,
  CL_SPEC_MISMATCH = 2,
  CL_NON_FINITE = 3,
  CL_NOT_CONVERGED = 4,
  CL_IO = 5,
  CL_PARSE = 6,
  CL_UNSUPPORTED = 7,
  CL_INTERNAL = 99
} cl_status;

typedef struct cl_field cl_field;

CL_API const char* cl_version(void);
CL_API const char* cl_last_error(void);
CL_API void cl_string_free(char* s);

/* Fields ----------------------------------------------------------------- */

/* Zero field on a grid such as "1x16,1x16,1x16" (dim x points). */
CL_API cl_status cl_field_create(const char* grid, cl_field** out);
CL_API cl_status cl_field_load(const char* path, cl_field** out);
CL_API cl_status cl_field_from_json(const char* text, cl_field** out);
CL_API void cl_field_free(cl_field* f);

CL_API cl_status cl_field_save(const cl_field* f, const char* path);
CL_API cl_status cl_field_to_json(const cl_field* f, char** out);
/* {grid, points, l2, min_re, max_re, max_abs, mean_re, mean_im}. */
CL_API cl_status cl_field_info(const cl_field* f, char** out);
CL_API size_t cl_field_size(const cl_field* f);
/* Interleaved re/im, 2 * cl_field_size doubles. */
CL_API cl_status cl_field_get(const cl_field* f, double* re_im, size_t count);
CL_API cl_status cl_field_set(cl_field* f, const double* re_im, size_t count);

/* Symbol generator, flat key = value config as in explab; sample index. */
CL_API cl_status cl_field_generate(const char* config_text, size_t index, cl_field** out);

/* BMO norms -------------------------------------------------------------- */

/* norm: "product" (selector "1,2" = grouped params), "little",
 * "little-product" (selector a partition "(13)(2)"), "separate".
 * Empty selector: all params / trivial partition. Result JSON. */
CL_API cl_status cl_bmo(const cl_field* b, const char* norm, const char* selector, int budget, char** out);

/* Commutators ------------------------------------------------------------ */

/* ops: multipliers separated by '|', e.g. "hilbert:k=2 | tensor(hilbert:k=1;hilbert:k=3)";
 * method "power" or "dense". Result JSON {descriptor, estimate}. */
CL_API cl_status cl_commutator_norm(const cl_field* b, const char* ops, const char* method, double tol,
                                    int max_iter, uint64_t seed, char** out);

/* Zonal ------------------------------------------------------------------ */

/* Random unit vectors, Monte Carlo conditional expectation against the
 * zonal product. Result JSON. */
CL_API cl_status cl_zonal_verify_product(int n, int d, uint64_t samples, uint64_t seed, char** out);
/* request: {"dirs": [[..],..], "k": [..], "N": 41, "a": .75, "b": .25, "m": 4, "grid": "2x16,2x16"};
 * result: multiplier descriptor with plateau certificate when a grid is given. */
CL_API cl_status cl_zonal_build_journe(const char* request_json, char** out);

/* Experiments ------------------------------------------------------------ */

/* kind "two-sided" or "shift-bound"; report JSON. *flagged_only is set
 * when every row was flagged. */
CL_API cl_status cl_explab_run(const char* kind, const char* config_text, char** out, int* flagged_only);
/* format "json", "csv" or "md". */
CL_API cl_status cl_explab_render(const char* report_json, const char* format, char** out);

#ifdef __cplusplus
}
#endif

#endif

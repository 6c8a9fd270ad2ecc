#ifndef KMC_H
#define KMC_H

/* Generated by cbindgen from the kmc-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Request handled and the verdict was decisive.
#define KMC_OK 0

// Request failed; the report carries an `error` object.
#define KMC_ERROR 1

// Request handled but the verdict is UNKNOWN or INCONCLUSIVE.
#define KMC_UNDECIDED 2

// Opaque session configuration: tower size, seed, search budget, and
// Teichmuller depth. Not thread-safe; use one handle per thread.
typedef struct KmcSession KmcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a session over F2(t1..tK)(x) with `tower` ground variables and
// the given self-test seed. Budget and depth start at library defaults.
// Never returns NULL; release with `kmc_session_free`.
struct KmcSession *kmc_session_new(size_t tower, uint64_t seed);

// Releases a session handle.
//
// # Safety
// `session` must be NULL or a pointer from `kmc_session_new` that has not
// been freed already.
void kmc_session_free(struct KmcSession *session);

// Sets the work budget for zero decisions and place certification.
//
// # Safety
// `session` must be a live pointer from `kmc_session_new`.
void kmc_session_set_budget(struct KmcSession *session, size_t budget);

// Sets the truncation depth for Teichmuller lift computations.
//
// # Safety
// `session` must be a live pointer from `kmc_session_new`.
void kmc_session_set_teich_depth(struct KmcSession *session, size_t depth);

// Runs one JSON request against a session and returns the JSON report as
// a NUL-terminated string owned by the library. When `exit_code` is not
// NULL it receives KMC_OK, KMC_ERROR, or KMC_UNDECIDED. Errors never
// crash; they land in the report's `error` field with KMC_ERROR.
//
// # Safety
// `session` must be a live pointer from `kmc_session_new`, `request` a
// NUL-terminated string, and `exit_code` NULL or a valid int pointer. The
// returned string must be released with `kmc_string_free`.
char *kmc_session_run(struct KmcSession *session, const char *request, int *exit_code);

// Runs one JSON request with default session settings (tower 1, seed 0).
// Envelope fields in the request still apply. Same ownership rules as
// `kmc_session_run`.
//
// # Safety
// `request` must be a NUL-terminated string and `exit_code` NULL or a
// valid int pointer. The returned string must be released with
// `kmc_string_free`.
char *kmc_run(const char *request, int *exit_code);

// Releases a string returned by `kmc_run` or `kmc_session_run`.
//
// # Safety
// `s` must be NULL or a pointer returned by this library that has not
// been freed already.
void kmc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KMC_H */

/* hgk C API: double coset structure of reductive matrix groups. */

#ifndef HGK_H
#define HGK_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum HgkStatus {
  HGK_STATUS_OK = 0,
  // config or matrix text is not valid JSON
  HGK_STATUS_PARSE_ERROR = 1,
  // JSON is well-formed but violates the config schema
  HGK_STATUS_SCHEMA_ERROR = 2,
  // config is schematically valid but fails semantic validation
  HGK_STATUS_VALIDATION_ERROR = 3,
  // a numeric routine failed (singular input, non-convergence, ...)
  HGK_STATUS_NUMERIC_ERROR = 4,
  // null pointer, bad UTF-8, or unknown command / fixture name
  HGK_STATUS_INVALID_ARGUMENT = 5,
} HgkStatus;

// Opaque context: a parsed config. Structures are built per command so a
// context stays cheap to create and share.
typedef struct HgkContext HgkContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a context from JSON config text.
//
// # Safety
// `config_json` must be a NUL-terminated string; `out` must be a valid
// pointer to receive the handle.
enum HgkStatus hgk_context_from_json(const char *config_json, struct HgkContext **out);

// Create a context from a bundled fixture name ("sl2" or "sl8").
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid.
enum HgkStatus hgk_context_from_fixture(const char *name, struct HgkContext **out);

// Canonical JSON text of the context's config.
//
// # Safety
// `ctx` must be a live handle from a constructor; `out` must be valid.
enum HgkStatus hgk_context_config_json(const struct HgkContext *ctx, char **out);

// Run a command against a context and return the JSON report.
//
// `command` is one of "validate", "member", "flow", "closed", "slice",
// "atlas". Commands taking a point require `matrix_json` (row-major nested
// arrays of [re, im] pairs); the others ignore it (pass NULL).
//
// # Safety
// `ctx` must be a live handle; strings NUL-terminated; `report_out` valid.
// The returned string must be freed with `hgk_string_free`.
enum HgkStatus hgk_run(const struct HgkContext *ctx,
                       const char *command,
                       const char *matrix_json,
                       char **report_out);

// Run a bundled example suite; the report carries per-check pass/fail.
//
// # Safety
// `name` NUL-terminated; `report_out` valid; `passed_out` may be NULL.
enum HgkStatus hgk_run_example(const char *name, bool *passed_out, char **report_out);

// Free a string returned by this library.
//
// # Safety
// `s` must have been returned by an hgk function and not freed before.
void hgk_string_free(char *s);

// Destroy a context handle.
//
// # Safety
// `ctx` must be a live handle from a constructor and not freed before.
void hgk_context_free(struct HgkContext *ctx);

// Thread-local message for the most recent error; valid until the next
// failing call on this thread.
const char *hgk_last_error(void);

// Library version as a static string.
const char *hgk_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HGK_H */

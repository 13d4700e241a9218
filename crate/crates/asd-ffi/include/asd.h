#ifndef ASD_H
#define ASD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an interface call. `Falsifier` mirrors exit code 3 of the
 * binary: the engine found a counterexample to an expected identity, which
 * is the scientifically interesting failure and never a usage error.
 */
typedef enum AsdStatus {
  AsdStatus_Ok = 0,
  AsdStatus_ParseError = 1,
  AsdStatus_PreconditionError = 2,
  AsdStatus_Falsifier = 3,
  AsdStatus_NullPointer = 4,
  AsdStatus_Panic = 5,
} AsdStatus;

/**
 * A validated connection file. Opaque; create with
 * [`asd_connection_parse`], release with [`asd_connection_free`].
 */
typedef struct AsdConnection AsdConnection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failing call on this thread, empty after a
 * success. The pointer stays valid until the next interface call on the
 * same thread; copy the contents before calling again.
 */
const char *asd_last_error(void);

/**
 * Parses and validates a connection file given as a JSON string. On
 * success stores a new handle through `out`.
 */
enum AsdStatus asd_connection_parse(const char *json, struct AsdConnection **out);

/**
 * Releases a handle from [`asd_connection_parse`]. Null is ignored.
 */
void asd_connection_free(struct AsdConnection *conn);

/**
 * Releases a string returned through an `out_json` parameter. Null is
 * ignored.
 */
void asd_string_free(char *s);

/**
 * Generic slope of the connection along the divisor, as a JSON report.
 */
enum AsdStatus asd_katz(const struct AsdConnection *conn, char **out_json);

/**
 * Specializes over divisor points at scaling exponent `a`. `point` is an
 * optional comma-separated list of `name=value` pairs for the transverse
 * coordinates (null: the points declared in the file). `truncation` is a
 * series order override; pass zero or a negative value for the adaptive
 * default.
 */
enum AsdStatus asd_specialize(const struct AsdConnection *conn,
                              uint32_t a,
                              const char *point,
                              int64_t truncation,
                              char **out_json);

/**
 * Degree and regularity verdicts for the synthesized presentation at
 * scaling exponent `a` (zero or negative: the generic slope, at least 1).
 * `order` overrides the expansion window when positive.
 */
enum AsdStatus asd_check_l(const struct AsdConnection *conn,
                           int64_t a,
                           int64_t order,
                           char **out_json);

/**
 * Nearby-cycle pieces of the one-variable restriction at the first
 * declared point (or the origin).
 */
enum AsdStatus asd_psi(const struct AsdConnection *conn, char **out_json);

/**
 * Averaged ramified lattice and its stability certificate. `tau` is an
 * optional strip offset such as "0" or "-1/2" (null: 0).
 */
enum AsdStatus asd_lattice(const struct AsdConnection *conn, const char *tau, char **out_json);

/**
 * Specializes, restricts to the fibre, and decomposes into linear forms at
 * scaling exponent `a` (zero or negative: the generic slope, at least 1).
 */
enum AsdStatus asd_decompose(const struct AsdConnection *conn, int64_t a, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASD_H */

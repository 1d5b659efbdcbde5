#ifndef WEBRANK_WEBRANK_H
#define WEBRANK_WEBRANK_H

/* C interface to the webrank library: load a web specification file and run
 * analyses that produce JSON reports. All strings are UTF-8; strings returned
 * through out-parameters are owned by the caller and released with
 * webrank_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct webrank_web webrank_web;

typedef enum webrank_status {
  WEBRANK_OK = 0,
  WEBRANK_E_ARGUMENT = 1,          /* null pointer, unknown command, bad option */
  WEBRANK_E_IO = 2,                /* file cannot be read */
  WEBRANK_E_PARSE = 3,             /* malformed spec file or expression */
  WEBRANK_E_VALIDATION = 4,        /* box, sampling config, degree */
  WEBRANK_E_DEGENERATE_PAIR = 5,   /* two functions not in general position */
  WEBRANK_E_DOMAIN = 6,
  WEBRANK_E_INSUFFICIENT_DOMAIN = 7,
  WEBRANK_E_RESOURCE = 8,
  WEBRANK_E_PRECONDITION = 9,
  WEBRANK_E_REDUCTION = 10,
  WEBRANK_E_VANISHING = 11,
  WEBRANK_E_INDETERMINATE = 12,    /* sampled identities disagree across seeds */
  WEBRANK_E_INTERNAL = 13
} webrank_status;

/* Overrides applied on top of the spec file. A zero field keeps the file's
 * value (or the library default). */
typedef struct webrank_options {
  int has_seed;
  uint64_t seed;
  int samples;
  double tol;
  /* Comma-separated 1-based permutation of the web functions, e.g. "2,1,3,4",
   * or NULL. */
  const char* order;
} webrank_options;

const char* webrank_version(void);

/* Message of the last failure on the calling thread ("" if none). */
const char* webrank_last_error(void);

/* Pair indices of the last WEBRANK_E_DEGENERATE_PAIR on this thread (1-based),
 * or 0. */
int webrank_last_pair(int* first, int* second);

const char* webrank_status_name(webrank_status status);

webrank_status webrank_load(const char* path, const webrank_options* options, webrank_web** out);
/* `origin` names the text in error messages and in the report. */
webrank_status webrank_load_string(const char* text, const char* origin, const webrank_options* options,
                                   webrank_web** out);
void webrank_free(webrank_web* web);

int webrank_degree(const webrank_web* web);
/* Number of candidate relations listed in the spec file. */
int webrank_relation_count(const webrank_web* web);

/* command: analyze, curvature, invariants, rank, abel, geodesic,
 * linearizable, verify-relation. On WEBRANK_OK the report is stored in
 * *report_json and *exit_code is 0 (definitive verdicts), 1 (an analysis
 * raised an error, embedded in the report) or 2 (indeterminate). */
webrank_status webrank_run(const webrank_web* web, const char* command, char** report_json, int* exit_code);

void webrank_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

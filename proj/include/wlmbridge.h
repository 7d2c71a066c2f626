/*
 * wlmbridge — bridge between declarative container-job manifests and
 * PBS/Torque batch queues.
 *
 * C API over the C++ core. All handles are opaque; every function that can
 * fail returns a WLMB_* code (0 = success) and leaves a human-readable
 * message in wlmb_last_error() for the calling thread. Strings returned
 * through char** are heap copies the caller releases with
 * wlmb_string_free(); strings returned as const char* stay owned by their
 * handle and are valid until that handle is freed.
 */

#ifndef WLMBRIDGE_H
#define WLMBRIDGE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    WLMB_OK = 0,
    WLMB_ERR_INVALID_ARG = 1,
    WLMB_ERR_MALFORMED_MANIFEST = 2,
    WLMB_ERR_UNSUPPORTED_KIND = 3,
    WLMB_ERR_MISSING_FIELD = 4,
    WLMB_ERR_MALFORMED_WALLTIME = 5,
    WLMB_ERR_MALFORMED_DIRECTIVE = 6,
    WLMB_ERR_UNKNOWN_VARIABLE = 7,
    WLMB_ERR_DUPLICATE_QUEUE = 8,
    WLMB_ERR_NO_SUCH_QUEUE = 9,
    WLMB_ERR_NO_FEASIBLE_QUEUE = 10,
    WLMB_ERR_BACKEND_UNAVAILABLE = 11,
    WLMB_ERR_NO_SUCH_JOB = 12,
    WLMB_ERR_ILLEGAL_TRANSITION = 13,
    WLMB_ERR_JOB_EXCEEDS_QUEUE = 14,
    WLMB_ERR_MALFORMED_CONFIG = 15,
    WLMB_ERR_MALFORMED_FRAME = 16,
    WLMB_ERR_OVERSIZED_FRAME = 17,
    WLMB_ERR_SOURCE_MISSING = 18,
    WLMB_ERR_DESTINATION_UNWRITABLE = 19,
    WLMB_ERR_RESULTS_UNAVAILABLE = 20,
    WLMB_ERR_TRANSPORT = 21,
    WLMB_ERR_ADDRESS_IN_USE = 22,
    WLMB_ERR_IO = 23,
    WLMB_ERR_INTERNAL = 24
};

typedef struct wlmb_bridge wlmb_bridge;
typedef struct wlmb_client wlmb_client;
typedef struct wlmb_joblist wlmb_joblist;
typedef struct wlmb_jobinfo wlmb_jobinfo;
typedef struct wlmb_queuelist wlmb_queuelist;

const char* wlmb_error_name(int code);
/* Message of the last failing call on this thread ("" when none). */
const char* wlmb_last_error(void);
void wlmb_string_free(char* s);

/* ---- bridge (server side) --------------------------------------------- */

/* Simulated cluster backend from a YAML config file. */
int wlmb_bridge_new_sim(const char* config_path, wlmb_bridge** out);
/* Same, from config text (tests, embedding). */
int wlmb_bridge_new_sim_text(const char* config_yaml, wlmb_bridge** out);
/* Real Torque/PBS backend via qsub/qstat/qdel. home may be NULL ($HOME). */
int wlmb_bridge_new_pbs(const char* home, wlmb_bridge** out);
void wlmb_bridge_free(wlmb_bridge* bridge);

/* Start the red-box endpoint on a Unix socket path. */
int wlmb_bridge_serve(wlmb_bridge* bridge, const char* socket_path);
/* Background progress: one tick every interval_ms until stop/free. */
int wlmb_bridge_start_auto(wlmb_bridge* bridge, int interval_ms);
int wlmb_bridge_stop(wlmb_bridge* bridge);

/* Sim backend: advance n simulated seconds, reconciling after each.
 * PBS backend: n reconcile passes. */
int wlmb_bridge_tick(wlmb_bridge* bridge, int n);
int wlmb_bridge_reconcile(wlmb_bridge* bridge);
/* Replace the text completed sim jobs write to their output path. */
int wlmb_bridge_set_sim_output(wlmb_bridge* bridge, const char* text);
const char* wlmb_bridge_home(const wlmb_bridge* bridge);

/* ---- client side ------------------------------------------------------ */

int wlmb_client_connect(const char* socket_path, wlmb_client** out);
void wlmb_client_free(wlmb_client* client);

int wlmb_client_submit_text(wlmb_client* client, const char* manifest_yaml,
                            char** uid_out, char** name_out);
int wlmb_client_submit_file(wlmb_client* client, const char* manifest_path,
                            char** uid_out, char** name_out);
int wlmb_client_list_jobs(wlmb_client* client, wlmb_joblist** out);
int wlmb_client_job_info(wlmb_client* client, const char* name, wlmb_jobinfo** out);
int wlmb_client_cancel(wlmb_client* client, const char* name, char** state_out);
/* Streams the collected result file into dest_dir; path_out is the file written. */
int wlmb_client_fetch_results(wlmb_client* client, const char* name,
                              const char* dest_dir, char** path_out);
int wlmb_client_list_queues(wlmb_client* client, wlmb_queuelist** out);

/* Local manifest validation without a server (fast-fail for clients). */
int wlmb_validate_manifest_file(const char* manifest_path, char** name_out);

/* ---- joblist ----------------------------------------------------------- */

int wlmb_joblist_count(const wlmb_joblist* list);
const char* wlmb_joblist_name(const wlmb_joblist* list, int i);
const char* wlmb_joblist_age(const wlmb_joblist* list, int i);
const char* wlmb_joblist_status(const wlmb_joblist* list, int i);
void wlmb_joblist_free(wlmb_joblist* list);

/* ---- jobinfo ------------------------------------------------------------ */

const char* wlmb_jobinfo_uid(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_name(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_state(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_queue(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_backend_id(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_failure_reason(const wlmb_jobinfo* info);
int64_t wlmb_jobinfo_age_seconds(const wlmb_jobinfo* info);
int wlmb_jobinfo_has_exit_code(const wlmb_jobinfo* info);
int wlmb_jobinfo_exit_code(const wlmb_jobinfo* info);
int wlmb_jobinfo_transition_count(const wlmb_jobinfo* info);
const char* wlmb_jobinfo_transition_state(const wlmb_jobinfo* info, int i);
int64_t wlmb_jobinfo_transition_at_ms(const wlmb_jobinfo* info, int i);
void wlmb_jobinfo_free(wlmb_jobinfo* info);

/* ---- queuelist ---------------------------------------------------------- */

int wlmb_queuelist_count(const wlmb_queuelist* list);
const char* wlmb_queuelist_name(const wlmb_queuelist* list, int i);
int wlmb_queuelist_max_nodes(const wlmb_queuelist* list, int i);
/* -1 when the queue declares no walltime limit. */
int64_t wlmb_queuelist_max_walltime(const wlmb_queuelist* list, int i);
int wlmb_queuelist_node_count(const wlmb_queuelist* list, int i);
const char* wlmb_queuelist_node(const wlmb_queuelist* list, int i, int j);
int wlmb_queuelist_pending(const wlmb_queuelist* list, int i);
int wlmb_queuelist_running(const wlmb_queuelist* list, int i);
void wlmb_queuelist_free(wlmb_queuelist* list);

#ifdef __cplusplus
}
#endif

#endif /* WLMBRIDGE_H */

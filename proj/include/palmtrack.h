#ifndef PALMTRACK_H
#define PALMTRACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PT_API __declspec(dllexport)
#elif defined(__GNUC__)
#define PT_API __attribute__((visibility("default")))
#else
#define PT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
    PT_OK = 0,
    PT_ERR_INVALID_ARGUMENT = 1,
    PT_ERR_CONFIG = 2,
    PT_ERR_IO = 3,
    PT_ERR_NUMERIC = 4,
    PT_ERR_RUNTIME = 5
} pt_status;

typedef struct pt_config pt_config;
typedef struct pt_mc_result pt_mc_result;

/* Message of the last failure on the calling thread; never NULL. */
PT_API const char* pt_last_error(void);
PT_API const char* pt_status_name(pt_status status);
PT_API const char* pt_version(void);

/* Configuration: defaults reproduce the two-target crossing scenario. */
PT_API pt_status pt_config_create(pt_config** out);
PT_API void pt_config_destroy(pt_config* cfg);
/* Applies a key = value file on top of the current settings. */
PT_API pt_status pt_config_load_file(pt_config* cfg, const char* path);
PT_API pt_status pt_config_set(pt_config* cfg, const char* key, const char* value);
PT_API pt_status pt_config_validate(const pt_config* cfg);
PT_API pt_status pt_config_hash(const pt_config* cfg, uint64_t* out);
/* Current value of one key; same buffer protocol as pt_config_text. */
PT_API pt_status pt_config_get(const pt_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
/* Copies the canonical text into buf; *needed receives the full length
   including the terminator. buf may be NULL when cap is 0. */
PT_API pt_status pt_config_text(const pt_config* cfg, char* buf, size_t cap, size_t* needed);

/* out_dir may be NULL in the run functions to use the configured "out". */

/* Writes truth.csv and scans.csv. */
PT_API pt_status pt_simulate(const pt_config* cfg, const char* out_dir);
/* truth_csv may be NULL to regenerate the noise-free truth from cfg. */
PT_API pt_status pt_track(const pt_config* cfg, const char* scans_csv, const char* truth_csv, const char* out_dir);
/* out may be NULL when only the files are wanted. */
PT_API pt_status pt_monte_carlo(const pt_config* cfg, const char* out_dir, pt_mc_result** out);

PT_API size_t pt_mc_result_cell_count(const pt_mc_result* result);
PT_API pt_status pt_mc_result_cell(const pt_mc_result* result, size_t cell, double* detect_prob, double* clutter_mean);
/* Scenario-average MOSPA of one extractor ("baseline" or "palm") in a cell. */
PT_API pt_status pt_mc_result_scenario_mospa(const pt_mc_result* result, size_t cell, const char* extractor,
                                             double* mean, double* stderr_out);
/* Mean extracted-track count per scan; scans receives the curve length. */
PT_API pt_status pt_mc_result_mean_tracks(const pt_mc_result* result, size_t cell, const char* extractor,
                                          double* buf, size_t cap, size_t* scans);
PT_API void pt_mc_result_destroy(pt_mc_result* result);

/* Text summary of a Monte Carlo output directory, same buffer protocol as
   pt_config_text. */
PT_API pt_status pt_report(const char* dir, char* buf, size_t cap, size_t* needed);

/* OSPA distance between two sets of 2-D points stored as x,y pairs. */
PT_API pt_status pt_ospa(const double* truth_xy, size_t n_truth, const double* est_xy, size_t n_est, double order,
                         double cutoff, double* out);

#ifdef __cplusplus
}
#endif

#endif

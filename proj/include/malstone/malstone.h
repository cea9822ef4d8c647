/*
 * libmalstone: site-entity-mark log generation and the MalStone A/B
 * benchmarks behind a C ABI.
 *
 * Conventions
 *   - Every fallible call returns an ms_status. On failure a message is
 *     stored per thread and can be read with ms_last_error() until the next
 *     failing call on that thread.
 *   - Opaque handles (ms_dataset, ms_result, ms_report, ms_checks) are
 *     created by the library and released with the matching *_free call.
 *     Freeing NULL is a no-op.
 *   - Strings returned through `const char**` are owned by the handle they
 *     came from and stay valid until it is freed.
 */
#ifndef MALSTONE_MALSTONE_H
#define MALSTONE_MALSTONE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MS_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define MS_API __attribute__((visibility("default")))
#else
#  define MS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
  MS_OK = 0,
  MS_ERR_INVALID_ARGUMENT = 1,  /* bad handle, flag or contract violation */
  MS_ERR_CONFIG_INVALID = 2,    /* GenConfig invariant violated */
  MS_ERR_CONFIG_INFEASIBLE = 3, /* generation cannot meet its quota */
  MS_ERR_IO = 4,
  MS_ERR_MALFORMED_RECORD = 5,
  MS_ERR_TRUNCATED_FILE = 6,
  MS_ERR_VERIFICATION = 7,      /* nondeterminism or failed check */
  MS_ERR_REPORT_MISMATCH = 8,   /* reports cannot be merged */
  MS_ERR_INTERNAL = 9
} ms_status;

typedef enum ms_benchmark { MS_BENCHMARK_A = 0, MS_BENCHMARK_B = 1 } ms_benchmark;

typedef enum ms_engine {
  MS_ENGINE_MAPREDUCE = 0,
  MS_ENGINE_BUCKETED = 1,
  MS_ENGINE_REFERENCE = 2
} ms_engine;

typedef struct ms_gen_config {
  uint32_t nodes;
  uint64_t records_per_node;
  uint64_t total_sites;
  uint64_t marked_sites;
  uint64_t entities;
  int32_t period_start_year;
  uint32_t period_start_month;
  uint32_t period_start_day;
  uint32_t period_days;
  double p_mark;
  uint32_t delay_days;
  double alpha;
  uint64_t events_min;
  uint64_t events_max;
  double background_mark_rate;
  uint64_t master_seed;
} ms_gen_config;

typedef struct ms_gen_summary {
  uint64_t records;
  uint64_t bytes;
  uint32_t partitions;
  uint64_t marked_events;
  uint64_t marked_entities;
  double seed_seconds;
  double scatter_seconds;
  double local_seconds;
} ms_gen_summary;

typedef struct ms_timing {
  double total_seconds;
  double scan_map_seconds;
  double shuffle_seconds;
  double reduce_seconds;
} ms_timing;

typedef struct ms_dataset ms_dataset;
typedef struct ms_result ms_result;
typedef struct ms_report ms_report;
typedef struct ms_checks ms_checks;

MS_API const char* ms_version(void);
MS_API const char* ms_status_name(ms_status s);
MS_API const char* ms_last_error(void);

/* ---- configuration ---- */
MS_API void ms_config_default(ms_gen_config* cfg);
/* desk-10M, A-10, A-100, A-1000, B-10, B-100, B-1000 */
MS_API ms_status ms_config_preset(const char* name, ms_gen_config* cfg);
/* 1 if the preset is too large for a workstation without explicit opt-in. */
MS_API int ms_preset_requires_force(const char* name);
/* Returns the number of violations; writes them newline-separated into buf
 * (truncated to buf_len, always NUL-terminated when buf_len > 0). */
MS_API size_t ms_config_validate(const ms_gen_config* cfg, char* buf, size_t buf_len);

/* ---- generation ---- */
MS_API ms_status ms_generate(const ms_gen_config* cfg, const char* data_dir, uint32_t workers,
                             ms_gen_summary* summary);
/* 48-bit node hash as 12 lowercase hex chars plus NUL; out must hold 13 bytes. */
MS_API void ms_node_hash(const char* node_name, char out[13]);

/* ---- datasets ---- */
MS_API ms_status ms_dataset_open(const char* data_dir, ms_dataset** out);
MS_API void ms_dataset_free(ms_dataset* ds);
MS_API uint64_t ms_dataset_records(const ms_dataset* ds);
MS_API uint64_t ms_dataset_bytes(const ms_dataset* ds);
MS_API uint32_t ms_dataset_nodes(const ms_dataset* ds);

/* ---- engines ---- */
/* work_dir may be NULL (bucketed scratch goes under <data-dir>/_work). */
MS_API ms_status ms_run(const ms_dataset* ds, ms_benchmark benchmark, ms_engine engine, uint32_t reducers,
                        uint32_t workers, const char* work_dir, ms_result** out);
MS_API void ms_result_free(ms_result* r);
MS_API size_t ms_result_sites(const ms_result* r);
MS_API ms_timing ms_result_timing(const ms_result* r);
/* Result CSV text (A: site_id,events,marked,rho; B: site_id,iso_year,iso_week,cum_events,cum_marked,rho). */
MS_API const char* ms_result_csv(ms_result* r, size_t* len);
MS_API ms_status ms_result_write_csv(ms_result* r, const char* path);

/* Timed runs with cross-run determinism check; writes the result CSV to
 * result_path when non-NULL. Fails with MS_ERR_VERIFICATION on mismatch. */
MS_API ms_status ms_benchmark_run(const ms_dataset* ds, ms_benchmark benchmark, ms_engine engine, uint32_t reducers,
                                  uint32_t workers, uint32_t runs, const char* work_dir, const char* result_path,
                                  ms_report** out);

/* ---- entity-set oracle ---- */
/* Exposure window defaults to the generation period, monitor window to the
 * period extended by the mark delay. Requires the seed's marks.tsv.
 * When weekly is non-zero, writes the nested weekly monitor series. */
MS_API ms_status ms_oracle_write_csv(const ms_dataset* ds, int weekly, const char* path, size_t* sites);

/* ---- run reports ---- */
MS_API ms_status ms_report_read(const char* path, ms_report** out);
MS_API ms_status ms_report_write(const ms_report* r, const char* path);
MS_API void ms_report_free(ms_report* r);
MS_API uint32_t ms_report_runs(const ms_report* r);
MS_API double ms_report_run_seconds(const ms_report* r, uint32_t run_index);
MS_API double ms_report_average_seconds(const ms_report* r);
/* Report CSV text. */
MS_API const char* ms_report_csv(ms_report* r, size_t* len);
/* format: 0 = text table, 1 = csv. The returned string is freed with ms_string_free. */
MS_API ms_status ms_report_table(const ms_report* const* reports, size_t count, int format, char** out);
MS_API void ms_string_free(char* s);

/* ---- verification ---- */
MS_API ms_status ms_verify(const char* data_dir, int with_ground_truth, uint64_t sample_records, uint32_t workers,
                           ms_checks** out);
MS_API void ms_checks_free(ms_checks* c);
MS_API size_t ms_checks_count(const ms_checks* c);
/* Returns 1 if check i passed. name/detail may be NULL. */
MS_API int ms_checks_get(const ms_checks* c, size_t i, const char** name, const char** detail);

#ifdef __cplusplus
}
#endif

#endif /* MALSTONE_MALSTONE_H */

#ifndef VOLUT_VOLUT_H
#define VOLUT_VOLUT_H

/* C interface to the volut point-cloud SR and streaming library.
 *
 * Every fallible call returns a volut_status. On failure the message is kept
 * per thread and read with volut_last_error() until the next failing call.
 * Strings handed out through char** must be released with volut_string_free.
 * Option objects are JSON text; NULL or "" means all defaults. */

#include <stddef.h>
#include <stdint.h>

#if defined(VOLUT_BUILDING_LIBRARY)
#define VOLUT_API __attribute__((visibility("default")))
#else
#define VOLUT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum volut_status {
  VOLUT_OK = 0,
  VOLUT_ERR_INVALID_ARGUMENT = 1,
  VOLUT_ERR_IO = 2,
  VOLUT_ERR_FORMAT = 3,
  VOLUT_ERR_CAPACITY = 4,
  VOLUT_ERR_PROTOCOL = 5,
  VOLUT_ERR_TIMEOUT = 6,
  VOLUT_ERR_INTERNAL = 7
} volut_status;

typedef struct volut_cloud volut_cloud;
typedef struct volut_lut volut_lut;
typedef struct volut_server volut_server;

VOLUT_API const char* volut_version(void);
VOLUT_API const char* volut_status_name(volut_status status);
VOLUT_API const char* volut_last_error(void);
VOLUT_API void volut_string_free(char* s);

/* Point clouds. xyz holds 3 floats per point, rgb 3 bytes per point or NULL. */
VOLUT_API volut_status volut_cloud_create(const float* xyz, const uint8_t* rgb, size_t count, volut_cloud** out);
VOLUT_API volut_status volut_cloud_load_ply(const char* path, volut_cloud** out);
VOLUT_API volut_status volut_cloud_save_ply(const volut_cloud* cloud, const char* path, int binary);
VOLUT_API size_t volut_cloud_size(const volut_cloud* cloud);
VOLUT_API int volut_cloud_has_colors(const volut_cloud* cloud);
/* Copies into caller buffers of at least 3 * size elements. */
VOLUT_API volut_status volut_cloud_positions(const volut_cloud* cloud, float* xyz);
VOLUT_API volut_status volut_cloud_colors(const volut_cloud* cloud, uint8_t* rgb);
VOLUT_API void volut_cloud_free(volut_cloud* cloud);

VOLUT_API volut_status volut_downsample_random(const volut_cloud* cloud, double ratio, uint64_t seed,
                                               volut_cloud** out);
VOLUT_API volut_status volut_downsample_fps(const volut_cloud* cloud, size_t count, volut_cloud** out);

/* Upsamples by `ratio` (>= 1). sr_json keys: k, d, adapt_dilation, refine,
 * search ("octree" | "brute_force"), reuse_neighbors. lut may be NULL, which
 * skips refinement. stats_json (may be NULL) receives timings. */
VOLUT_API volut_status volut_upsample(const volut_cloud* cloud, double ratio, const char* sr_json,
                                      const volut_lut* lut, uint64_t seed, volut_cloud** out,
                                      char** stats_json);

/* Quality of `test` against `reference`: chamfer, geometry_psnr, exact. */
VOLUT_API volut_status volut_evaluate(const volut_cloud* reference, const volut_cloud* test,
                                      char** report_json);

/* Lookup tables. refiner is "laplacian" (uses lambda) or "zero". */
VOLUT_API volut_status volut_lut_size_bytes(size_t rf_size, uint32_t bins, uint64_t* bytes);
VOLUT_API volut_status volut_lut_build(size_t rf_size, uint32_t bins, const char* refiner, double lambda,
                                       volut_lut** out);
VOLUT_API volut_status volut_lut_load(const char* path, volut_lut** out);
VOLUT_API volut_status volut_lut_save(const volut_lut* lut, const char* path, uint64_t* bytes_written);
VOLUT_API size_t volut_lut_rf_size(const volut_lut* lut);
VOLUT_API uint32_t volut_lut_bins(const volut_lut* lut);
VOLUT_API void volut_lut_free(volut_lut* lut);

/* Streaming. config_json is a session config (see README). */
VOLUT_API volut_status volut_simulate(const char* trace_csv, const char* manifest_path, const char* config_json,
                                      const volut_lut* lut, int with_timing, char** report_json);
/* Plays from a running server. out_dir, when not NULL, receives one PLY per
 * played frame. */
VOLUT_API volut_status volut_play(const char* endpoint, const char* config_json, const volut_lut* lut,
                                  const char* out_dir, int with_timing, char** report_json);
/* Median per-frame wall time of the real SR pipeline at `points` output points. */
VOLUT_API volut_status volut_calibrate_sr(size_t points, double sr_ratio, const char* sr_json, const volut_lut* lut,
                                          uint64_t seed, int repeats, double* per_frame_s);
VOLUT_API volut_status volut_report_recompute_qoe(const char* report_json, double* total_qoe);

/* options_json keys: bind ("host:port"), trace (CSV path), rtt_s,
 * burst_bytes, cache_capacity. The server runs on background threads. */
VOLUT_API volut_status volut_server_start(const char* video_dir, const char* manifest_path,
                                          const char* options_json, volut_server** out);
VOLUT_API uint16_t volut_server_port(const volut_server* server);
VOLUT_API uint64_t volut_server_bytes_sent(const volut_server* server);
/* Stops and joins; the handle stays valid until freed. */
VOLUT_API void volut_server_stop(volut_server* server);
VOLUT_API void volut_server_free(volut_server* server);

/* Benchmarks and synthetic data. */
VOLUT_API volut_status volut_bench(const char* options_json, const volut_lut* lut, char** result_json);
/* spec_json keys: video_id, chunks, frames_per_chunk, points_per_frame,
 * point_jitter, chunk_duration_s, seed. Writes PLYs and manifest.json, or
 * only the manifest when manifest_only is set. */
VOLUT_API volut_status volut_synthetic_video(const char* dir, const char* spec_json, int manifest_only);
VOLUT_API volut_status volut_synthetic_trace(const char* path, double mean_mbps, double std_mbps,
                                             double duration_s, double step_s, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif

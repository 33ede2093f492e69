#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "volut/abr.hpp"
#include "volut/lut.hpp"
#include "volut/manifest.hpp"
#include "volut/socket.hpp"
#include "volut/sr_pipeline.hpp"
#include "volut/timeline.hpp"
#include "volut/trace.hpp"

namespace volut {

// SR time charged per upsampled frame in simulation.
struct SrLatencyModel {
  double per_frame_s = 0.010;
  double per_output_point_s = 0.0;
  double slowdown = 1.0;

  double frame_seconds(std::size_t output_points) const;
};

// Times the real pipeline on a synthetic frame of `points` output points at
// the given SR ratio and returns the median per-frame time as a model.
SrLatencyModel calibrate_sr_latency(std::size_t points, double sr_ratio, const SrConfig& sr,
                                    const LutTable* lut, std::uint64_t seed, int repeats = 3);

struct SessionConfig {
  AbrConfig abr;
  double theta = 20.0;        // log quality curve, unless the manifest ships a table
  double max_buffer_s = 5.0;  // fetching pauses while the buffer holds more
  std::uint64_t seed = 1;
  bool count_lut_bytes = false;
  std::size_t max_chunks = 0;  // 0: whole video

  // simulation
  double rtt_s = 0.010;
  double burst_bytes = 16384.0;
  SrLatencyModel sr_model;

  // live
  SrConfig sr;
  double timeout_s = 30.0;
  bool realtime = false;  // sleep so requests follow the virtual playback clock
};

struct ChunkRecord {
  std::size_t index = 0;
  double ratio = 1.0;  // fetched density ratio, as sent on the wire
  double sr_ratio = 1.0;
  double expected_qoe = 0.0;
  double buffer_before_s = 0.0;
  std::uint64_t bytes = 0;
  double download_s = 0.0;
  double sr_s = 0.0;
  double stall_s = 0.0;
  double throughput_bps = 0.0;
  std::uint32_t crc32c = 0;  // live only
  std::uint64_t fetched_points = 0;
  std::uint64_t played_points = 0;
  ChunkEvents events;
  QoeTerms qoe;
};

struct SessionReport {
  std::string mode;  // "simulated" or "live"
  std::string video_id;
  double chunk_duration_s = 1.0;
  QoeWeights weights;
  double theta = 20.0;
  std::vector<std::pair<double, double>> quality_table;
  std::vector<ChunkRecord> chunks;
  double total_qoe = 0.0;
  double total_stall_s = 0.0;
  std::size_t stall_events = 0;
  double startup_s = 0.0;
  std::uint64_t manifest_bytes = 0;
  std::uint64_t lut_bytes = 0;
  std::uint64_t chunk_bytes = 0;
  std::uint64_t bytes_downloaded = 0;
  std::uint64_t shaped_bytes = 0;  // bytes that went through the shaper (simulation)
  double mean_ratio = 0.0;
};

// Called with each chunk's frames after SR, in playback order.
using FrameSink = std::function<void(std::size_t chunk, const std::vector<PointCloud>& frames)>;

SessionReport simulate_session(const NetworkTrace& trace, const ChunkManifest& manifest,
                               const SessionConfig& config, std::uint64_t lut_bytes = 0);

SessionReport live_session(const Endpoint& server, const SessionConfig& config, const LutTable* lut,
                           std::uint64_t lut_bytes = 0, const FrameSink& sink = {});

// `with_timing = false` drops wall-clock measurements (download, SR and event
// times, throughput) and keeps decisions, sizes, checksums, stalls and QoE.
std::string report_to_json(const SessionReport& report, bool with_timing = true);
SessionReport report_from_json(std::string_view text);

// Total QoE recomputed from the per-chunk decision log alone.
double recompute_qoe(const SessionReport& report);

}  // namespace volut

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "volut/manifest.hpp"
#include "volut/ply.hpp"
#include "volut/point_cloud.hpp"
#include "volut/trace.hpp"

namespace volut {

// Uniform surface samples.
PointCloud sample_sphere(std::size_t n, std::uint64_t seed, double radius = 1.0);
PointCloud sample_torus(std::size_t n, std::uint64_t seed, double major = 1.0, double minor = 0.35);
PointCloud sample_cube(std::size_t n, std::uint64_t seed);

// Colored, slowly deforming closed surface; t is the frame time in seconds.
PointCloud synthetic_frame(std::size_t n, double t, std::uint64_t seed);

struct VideoSpec {
  std::string video_id = "synthetic";
  std::size_t chunks = 30;
  std::size_t frames_per_chunk = 30;
  std::size_t points_per_frame = 2000;
  double point_jitter = 0.05;  // per-frame count varies by up to this fraction
  double chunk_duration_s = 1.0;
  std::uint64_t seed = 7;
};

ChunkManifest synthetic_manifest(const VideoSpec& spec);
// Writes every frame as binary PLY plus manifest.json into `dir`.
ChunkManifest write_synthetic_video(const std::filesystem::path& dir, const VideoSpec& spec);

// Bandwidth as a mean-reverting random walk sampled every step_s seconds,
// floored at 5% of the mean.
NetworkTrace synthetic_lte_trace(double mean_mbps, double std_mbps, double duration_s, double step_s,
                                 std::uint64_t seed);

}  // namespace volut

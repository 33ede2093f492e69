#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace volut {

struct LutDescriptor {
  std::size_t rf_size = 4;
  std::uint32_t bins = 16;
  std::string provenance;
  std::string path;  // relative to the manifest, may be empty
};

struct ChunkManifest {
  std::string video_id;
  double chunk_duration_s = 1.0;
  std::size_t frames_per_chunk = 30;
  bool has_colors = true;
  // chunk_points[c][f]: full point count of frame f in chunk c.
  std::vector<std::vector<std::uint32_t>> chunk_points;
  // Optional measured (ratio, quality) knots.
  std::vector<std::pair<double, double>> quality_table;
  std::optional<LutDescriptor> lut;

  std::size_t chunk_count() const { return chunk_points.size(); }
  double duration_s() const { return chunk_duration_s * static_cast<double>(chunk_count()); }
  double bytes_per_point() const { return has_colors ? 15.0 : 12.0; }
  std::uint64_t full_points(std::size_t chunk) const;
  // Exact size of the chunk response for a wire ratio (header, frame
  // blocks, checksum). Point counts use the same rounding as the server.
  std::uint64_t chunk_bytes(std::size_t chunk, float ratio) const;

  void validate() const;
};

std::string manifest_to_json(const ChunkManifest& m);
ChunkManifest manifest_from_json(std::string_view text);
ChunkManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const ChunkManifest& m, const std::filesystem::path& path);

}  // namespace volut

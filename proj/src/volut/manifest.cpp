#include "volut/manifest.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "volut/error.hpp"
#include "volut/sampling.hpp"
#include "volut/wire.hpp"

namespace volut {

using nlohmann::json;

std::uint64_t ChunkManifest::full_points(std::size_t chunk) const {
  require(chunk < chunk_count(), "manifest: chunk index out of range");
  std::uint64_t total = 0;
  for (std::uint32_t n : chunk_points[chunk]) total += n;
  return total;
}

std::uint64_t ChunkManifest::chunk_bytes(std::size_t chunk, float ratio) const {
  require(chunk < chunk_count(), "manifest: chunk index out of range");
  std::uint64_t bytes = kResponseHeaderSize + kCrcSize;
  for (std::uint32_t n : chunk_points[chunk])
    bytes += frame_block_size(downsample_count(n, static_cast<double>(ratio)), has_colors);
  return bytes;
}

void ChunkManifest::validate() const {
  require(!video_id.empty(), "manifest: empty video id");
  require(std::isfinite(chunk_duration_s) && chunk_duration_s > 0.0, "manifest: chunk_duration_s must be > 0");
  require(frames_per_chunk > 0 && frames_per_chunk <= UINT16_MAX, "manifest: frames_per_chunk out of range");
  require(!chunk_points.empty(), "manifest: no chunks");
  for (const auto& c : chunk_points) {
    require(c.size() == frames_per_chunk, "manifest: chunk frame count differs from frames_per_chunk");
    for (std::uint32_t n : c) require(n > 0, "manifest: point counts must be positive");
  }
  double prev_r = 0.0, prev_q = 0.0;
  for (const auto& [r, q] : quality_table) {
    require(r > prev_r && r <= 1.0 && q >= prev_q && q <= 1.0, "manifest: quality table must be monotone in (0,1]");
    prev_r = r;
    prev_q = q;
  }
  if (lut) require(lut->rf_size >= 1 && lut->bins >= 2, "manifest: bad LUT descriptor");
}

std::string manifest_to_json(const ChunkManifest& m) {
  json j;
  j["video_id"] = m.video_id;
  j["chunk_count"] = m.chunk_count();
  j["chunk_duration_s"] = m.chunk_duration_s;
  j["frames_per_chunk"] = m.frames_per_chunk;
  j["has_colors"] = m.has_colors;
  j["bytes_per_point"] = m.bytes_per_point();
  j["chunk_points"] = m.chunk_points;
  if (!m.quality_table.empty()) {
    json t = json::array();
    for (const auto& [r, q] : m.quality_table) t.push_back({r, q});
    j["quality_table"] = t;
  }
  if (m.lut) {
    j["lut"] = {{"n", m.lut->rf_size}, {"b", m.lut->bins}, {"provenance", m.lut->provenance}, {"path", m.lut->path}};
  }
  return j.dump(2) + "\n";
}

ChunkManifest manifest_from_json(std::string_view text) {
  ChunkManifest m;
  try {
    const json j = json::parse(text);
    m.video_id = j.at("video_id").get<std::string>();
    m.chunk_duration_s = j.at("chunk_duration_s").get<double>();
    m.frames_per_chunk = j.at("frames_per_chunk").get<std::size_t>();
    m.has_colors = j.value("has_colors", true);
    m.chunk_points = j.at("chunk_points").get<std::vector<std::vector<std::uint32_t>>>();
    if (j.contains("chunk_count") && j["chunk_count"].get<std::size_t>() != m.chunk_points.size())
      fail(ErrorCode::kFormat, "manifest: chunk_count disagrees with chunk_points");
    if (j.contains("quality_table"))
      for (const auto& k : j["quality_table"]) m.quality_table.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    if (j.contains("lut")) {
      const auto& l = j["lut"];
      m.lut = LutDescriptor{l.at("n").get<std::size_t>(), l.at("b").get<std::uint32_t>(),
                            l.value("provenance", std::string()), l.value("path", std::string())};
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("manifest: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, e.what());
  }
  return m;
}

ChunkManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "manifest: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

void save_manifest(const ChunkManifest& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "manifest: cannot write " + path.string());
  out << manifest_to_json(m);
}

}  // namespace volut

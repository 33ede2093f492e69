#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volut/point_cloud.hpp"

namespace volut {

inline constexpr std::size_t kRequestSize = 20;
inline constexpr std::size_t kResponseHeaderSize = 21;
inline constexpr std::size_t kCrcSize = 4;
inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::uint16_t kWireVersion = 1;

enum class RequestType : std::uint8_t { kManifest = 0, kChunk = 1 };
enum class Status : std::uint8_t { kOk = 0, kUnknownChunk = 1, kBadRequest = 2, kInternal = 3 };

struct Request {
  RequestType type = RequestType::kChunk;
  std::uint32_t chunk_id = 0;
  float ratio = 1.0f;
};

struct ResponseHeader {
  std::uint16_t version = kWireVersion;
  Status status = Status::kOk;
  std::uint32_t chunk_id = 0;
  std::uint16_t frame_count = 0;
  std::uint64_t payload_len = 0;
};

std::uint32_t crc32c(std::string_view bytes);

std::array<std::uint8_t, kRequestSize> encode_request(const Request& req);
Request decode_request(std::span<const std::uint8_t, kRequestSize> bytes);

std::array<std::uint8_t, kResponseHeaderSize> encode_response_header(const ResponseHeader& h);
ResponseHeader decode_response_header(std::span<const std::uint8_t, kResponseHeaderSize> bytes);
// Header + payload + CRC32C of the payload.
std::string encode_response(ResponseHeader h, std::string_view payload);

// Frame block: u32 point count, u8 flags (bit 0: colors present), the
// positions as f32 triples, then the colors as u8 triples.
std::size_t frame_block_size(std::size_t points, bool colors);
void append_frame(std::string& out, const PointCloud& frame);
std::vector<PointCloud> decode_frames(std::string_view payload, std::size_t frame_count);

}  // namespace volut

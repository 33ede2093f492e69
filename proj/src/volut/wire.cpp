#include "volut/wire.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <cmath>
#include <cstring>

#include "volut/error.hpp"

namespace volut {

static_assert(std::endian::native == std::endian::little, "wire codec assumes a little-endian host");

namespace {

template <typename T>
void put(std::uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

template <typename T>
T get(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

std::uint32_t crc32c(std::string_view bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::array<std::uint8_t, kRequestSize> encode_request(const Request& req) {
  std::array<std::uint8_t, kRequestSize> out{};
  std::memcpy(out.data(), "VLRQ", 4);
  put<std::uint16_t>(out.data() + 4, kWireVersion);
  out[6] = static_cast<std::uint8_t>(req.type);
  put<std::uint32_t>(out.data() + 7, req.chunk_id);
  put<float>(out.data() + 11, req.ratio);
  return out;
}

Request decode_request(std::span<const std::uint8_t, kRequestSize> b) {
  if (std::memcmp(b.data(), "VLRQ", 4) != 0) fail(ErrorCode::kProtocol, "request: bad magic");
  if (get<std::uint16_t>(b.data() + 4) != kWireVersion) fail(ErrorCode::kProtocol, "request: unsupported version");
  Request r;
  const std::uint8_t type = b[6];
  if (type > 1) fail(ErrorCode::kProtocol, "request: unknown type " + std::to_string(type));
  r.type = static_cast<RequestType>(type);
  r.chunk_id = get<std::uint32_t>(b.data() + 7);
  r.ratio = get<float>(b.data() + 11);
  if (r.type == RequestType::kChunk && !(r.ratio > 0.0f && r.ratio <= 1.0f))
    fail(ErrorCode::kProtocol, "request: ratio outside (0, 1]");
  return r;
}

std::array<std::uint8_t, kResponseHeaderSize> encode_response_header(const ResponseHeader& h) {
  std::array<std::uint8_t, kResponseHeaderSize> out{};
  std::memcpy(out.data(), "VLRS", 4);
  put<std::uint16_t>(out.data() + 4, h.version);
  out[6] = static_cast<std::uint8_t>(h.status);
  put<std::uint32_t>(out.data() + 7, h.chunk_id);
  put<std::uint16_t>(out.data() + 11, h.frame_count);
  put<std::uint64_t>(out.data() + 13, h.payload_len);
  return out;
}

ResponseHeader decode_response_header(std::span<const std::uint8_t, kResponseHeaderSize> b) {
  if (std::memcmp(b.data(), "VLRS", 4) != 0) fail(ErrorCode::kProtocol, "response: bad magic");
  ResponseHeader h;
  h.version = get<std::uint16_t>(b.data() + 4);
  if (h.version != kWireVersion) fail(ErrorCode::kProtocol, "response: unsupported version");
  if (b[6] > 3) fail(ErrorCode::kProtocol, "response: unknown status");
  h.status = static_cast<Status>(b[6]);
  h.chunk_id = get<std::uint32_t>(b.data() + 7);
  h.frame_count = get<std::uint16_t>(b.data() + 11);
  h.payload_len = get<std::uint64_t>(b.data() + 13);
  return h;
}

std::string encode_response(ResponseHeader h, std::string_view payload) {
  h.payload_len = payload.size();
  const auto head = encode_response_header(h);
  std::string out;
  out.reserve(kResponseHeaderSize + payload.size() + kCrcSize);
  out.append(reinterpret_cast<const char*>(head.data()), head.size());
  out.append(payload);
  std::uint8_t crc[4];
  put<std::uint32_t>(crc, crc32c(payload));
  out.append(reinterpret_cast<const char*>(crc), 4);
  return out;
}

std::size_t frame_block_size(std::size_t points, bool colors) {
  return kFrameHeaderSize + points * (colors ? 15 : 12);
}

void append_frame(std::string& out, const PointCloud& frame) {
  require(frame.size() <= UINT32_MAX, "wire: frame too large");
  const std::size_t start = out.size();
  out.resize(start + frame_block_size(frame.size(), frame.has_colors()));
  auto* p = reinterpret_cast<std::uint8_t*>(out.data() + start);
  put<std::uint32_t>(p, static_cast<std::uint32_t>(frame.size()));
  p[4] = frame.has_colors() ? 1 : 0;
  p += kFrameHeaderSize;
  for (const Vec3& v : frame.positions()) {
    put<float>(p, v.x);
    put<float>(p + 4, v.y);
    put<float>(p + 8, v.z);
    p += 12;
  }
  for (const Rgb& c : frame.colors()) {
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    p += 3;
  }
}

std::vector<PointCloud> decode_frames(std::string_view payload, std::size_t frame_count) {
  std::vector<PointCloud> frames;
  frames.reserve(frame_count);
  const auto* p = reinterpret_cast<const std::uint8_t*>(payload.data());
  std::size_t left = payload.size();
  for (std::size_t f = 0; f < frame_count; ++f) {
    if (left < kFrameHeaderSize) fail(ErrorCode::kProtocol, "payload: truncated frame header");
    const std::uint32_t count = get<std::uint32_t>(p);
    const std::uint8_t flags = p[4];
    if (flags > 1) fail(ErrorCode::kProtocol, "payload: unknown frame flags");
    const std::size_t need = frame_block_size(count, flags & 1);
    if (left < need) fail(ErrorCode::kProtocol, "payload: truncated frame body");
    const std::uint8_t* q = p + kFrameHeaderSize;
    std::vector<Vec3> pos(count);
    for (std::uint32_t i = 0; i < count; ++i, q += 12) {
      pos[i] = {get<float>(q), get<float>(q + 4), get<float>(q + 8)};
      if (!std::isfinite(pos[i].x) || !std::isfinite(pos[i].y) || !std::isfinite(pos[i].z))
        fail(ErrorCode::kProtocol, "payload: non-finite coordinate");
    }
    std::vector<Rgb> col;
    if (flags & 1) {
      col.resize(count);
      for (std::uint32_t i = 0; i < count; ++i, q += 3) col[i] = {q[0], q[1], q[2]};
    }
    frames.emplace_back(std::move(pos), std::move(col));
    p += need;
    left -= need;
  }
  if (left != 0) fail(ErrorCode::kProtocol, "payload: trailing bytes after last frame");
  return frames;
}

}  // namespace volut

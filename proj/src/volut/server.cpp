#include "volut/server.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "volut/error.hpp"
#include "volut/logging.hpp"
#include "volut/ply.hpp"
#include "volut/rng.hpp"
#include "volut/sampling.hpp"
#include "volut/shaper.hpp"
#include "volut/wire.hpp"

namespace volut {

namespace {

constexpr std::size_t kSegmentBytes = 16384;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t chunk, std::size_t frame) {
  char c[32], f[32];
  std::snprintf(c, sizeof(c), "chunk_%05zu", chunk);
  std::snprintf(f, sizeof(f), "frame_%03zu.ply", frame);
  return dir / c / f;
}

std::uint64_t frame_seed(const std::string& video_id, std::uint32_t chunk, std::uint32_t frame, double ratio) {
  const auto q = static_cast<std::uint64_t>(std::llround(ratio * 1e4));
  std::uint64_t h = splitmix64(fnv1a(video_id));
  h = splitmix64(h ^ chunk);
  h = splitmix64(h ^ frame);
  return splitmix64(h ^ q);
}

VideoStore::VideoStore(ChunkManifest manifest, std::vector<std::vector<PointCloud>> frames)
    : manifest_(std::move(manifest)), frames_(std::move(frames)) {
  manifest_.validate();
  require(frames_.size() == manifest_.chunk_count(), "video store: chunk count differs from manifest");
  for (std::size_t c = 0; c < frames_.size(); ++c) {
    require(frames_[c].size() == manifest_.frames_per_chunk, "video store: frame count differs from manifest");
    for (std::size_t f = 0; f < frames_[c].size(); ++f) {
      if (frames_[c][f].size() != manifest_.chunk_points[c][f])
        fail(ErrorCode::kFormat, "video store: chunk " + std::to_string(c) + " frame " + std::to_string(f) +
                                     " has " + std::to_string(frames_[c][f].size()) + " points, manifest says " +
                                     std::to_string(manifest_.chunk_points[c][f]));
      if (frames_[c][f].has_colors() != manifest_.has_colors)
        fail(ErrorCode::kFormat, "video store: color presence differs from manifest");
    }
  }
}

std::shared_ptr<const VideoStore> VideoStore::load(const std::filesystem::path& dir,
                                                   const std::filesystem::path& manifest_path) {
  ChunkManifest m = load_manifest(manifest_path);
  std::vector<std::vector<PointCloud>> frames(m.chunk_count());
  for (std::size_t c = 0; c < m.chunk_count(); ++c) {
    frames[c].reserve(m.frames_per_chunk);
    for (std::size_t f = 0; f < m.frames_per_chunk; ++f) frames[c].push_back(load_ply(frame_path(dir, c, f)));
  }
  return std::make_shared<const VideoStore>(std::move(m), std::move(frames));
}

ChunkEncoder::ChunkEncoder(std::shared_ptr<const VideoStore> store, std::size_t cache_capacity)
    : store_(std::move(store)), capacity_(cache_capacity) {
  ResponseHeader h;
  h.chunk_id = 0;
  h.frame_count = 0;
  manifest_response_ = std::make_shared<const std::string>(encode_response(h, manifest_to_json(store_->manifest())));
}

std::shared_ptr<const std::string> ChunkEncoder::encode(std::uint32_t chunk, float ratio) const {
  const ChunkManifest& m = store_->manifest();
  ResponseHeader h;
  h.chunk_id = chunk;
  if (chunk >= m.chunk_count()) {
    h.status = Status::kUnknownChunk;
    return std::make_shared<const std::string>(encode_response(h, {}));
  }
  h.frame_count = static_cast<std::uint16_t>(m.frames_per_chunk);
  std::string payload;
  for (std::uint32_t f = 0; f < m.frames_per_chunk; ++f) {
    const PointCloud& full = store_->frame(chunk, f);
    append_frame(payload, random_downsample(full, ratio, frame_seed(m.video_id, chunk, f, ratio)));
  }
  return std::make_shared<const std::string>(encode_response(h, payload));
}

std::shared_ptr<const std::string> ChunkEncoder::chunk_response(std::uint32_t chunk, float ratio) {
  const Key key = (static_cast<Key>(chunk) << 32) | std::bit_cast<std::uint32_t>(ratio);
  {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->second;
    }
    ++misses_;
  }
  auto encoded = encode(chunk, ratio);
  if (capacity_ == 0) return encoded;
  std::lock_guard lock(mu_);
  if (index_.find(key) == index_.end()) {
    lru_.emplace_front(key, encoded);
    index_[key] = lru_.begin();
    while (lru_.size() > capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
  }
  return encoded;
}

std::uint64_t ChunkEncoder::cache_hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t ChunkEncoder::cache_misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::size_t ChunkEncoder::cache_size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

Server::Server(std::shared_ptr<const VideoStore> store, ServerOptions options)
    : store_(std::move(store)), options_(std::move(options)), encoder_(store_, options_.cache_capacity) {
  require(options_.rtt_s >= 0.0, "server: rtt must be >= 0");
}

Server::~Server() { stop(); }

void Server::start() {
  require(!listener_.valid(), "server: already started");
  listener_ = listen_tcp(options_.bind);
  port_ = local_port(listener_);
  acceptor_ = std::thread([this] { accept_loop(); });
  log().info("serving '{}' on {}:{}", store_->manifest().video_id, options_.bind.host, port_);
}

void Server::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || !listener_.valid()) {
      stopping_ = true;
      cv_.notify_all();
      return;
    }
    stopping_ = true;
    listener_.shutdown();
    for (auto& w : connections_)
      if (auto s = w.lock()) s->shutdown();
  }
  cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  listener_.close();
}

void Server::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return stopping_; });
}

void Server::accept_loop() {
  while (true) {
    Socket s = accept_tcp(listener_);
    std::lock_guard lock(mu_);
    if (!s.valid() || stopping_) return;
    auto sock = std::make_shared<Socket>(std::move(s));
    connections_.push_back(sock);
    workers_.emplace_back([this, sock] { serve_connection(sock); });
  }
}

bool Server::sleep_until(std::chrono::steady_clock::time_point t) {
  std::unique_lock lock(mu_);
  return !cv_.wait_until(lock, t, [this] { return stopping_; });
}

bool Server::paced_send(Socket& sock, const std::string& bytes, TraceShaper* shaper,
                        std::chrono::steady_clock::time_point epoch) {
  using Clock = std::chrono::steady_clock;
  auto at = [&](double s) { return epoch + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s)); };
  auto now_s = [&] { return std::chrono::duration<double>(Clock::now() - epoch).count(); };
  if (options_.rtt_s > 0.0 && !sleep_until(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                               std::chrono::duration<double>(options_.rtt_s))))
    return false;
  if (shaper == nullptr) {
    sock.send_all(bytes.data(), bytes.size());
    bytes_sent_ += bytes.size();
    return true;
  }
  for (std::size_t off = 0; off < bytes.size(); off += kSegmentBytes) {
    const std::size_t len = std::min(kSegmentBytes, bytes.size() - off);
    const double done = shaper->schedule(now_s(), static_cast<double>(len));
    if (std::isinf(done)) return false;  // the trace never delivers these bytes
    if (!sleep_until(at(done))) return false;
    sock.send_all(bytes.data() + off, len);
    bytes_sent_ += len;
  }
  return true;
}

void Server::serve_connection(std::shared_ptr<Socket> sock) {
  const auto epoch = std::chrono::steady_clock::now();
  std::unique_ptr<TraceShaper> shaper;
  if (options_.trace) shaper = std::make_unique<TraceShaper>(*options_.trace, 0.0, options_.burst_bytes);
  try {
    while (true) {
      std::array<std::uint8_t, kRequestSize> raw;
      if (!sock->recv_exact(raw.data(), raw.size(), 0.0)) return;
      std::shared_ptr<const std::string> response;
      try {
        const Request req = decode_request(raw);
        response = req.type == RequestType::kManifest ? encoder_.manifest_response()
                                                      : encoder_.chunk_response(req.chunk_id, req.ratio);
      } catch (const Error& e) {
        log().warn("rejecting request: {}", e.what());
        ResponseHeader h;
        h.status = Status::kBadRequest;
        const std::string bad = encode_response(h, {});
        paced_send(*sock, bad, shaper.get(), epoch);
        return;
      }
      if (!paced_send(*sock, *response, shaper.get(), epoch)) return;
    }
  } catch (const Error& e) {
    log().debug("connection closed: {}", e.what());
  }
}

ChunkClient::ChunkClient(const Endpoint& server, double timeout_s)
    : sock_(connect_tcp(server, timeout_s)), timeout_s_(timeout_s) {}

std::string ChunkClient::exchange(const Request& req, ResponseHeader& header, double& seconds) {
  const auto raw = encode_request(req);
  const auto t0 = std::chrono::steady_clock::now();
  sock_.send_all(raw.data(), raw.size());
  std::array<std::uint8_t, kResponseHeaderSize> head;
  if (!sock_.recv_exact(head.data(), head.size(), timeout_s_))
    fail(ErrorCode::kProtocol, "server closed the connection");
  header = decode_response_header(head);
  if (header.status != Status::kOk) {
    std::uint8_t crc[kCrcSize];
    sock_.recv_exact(crc, kCrcSize, timeout_s_);
    if (header.status == Status::kUnknownChunk)
      fail(ErrorCode::kInvalidArgument, "server: unknown chunk " + std::to_string(header.chunk_id));
    fail(ErrorCode::kProtocol, "server rejected request (status " +
                                   std::to_string(static_cast<int>(header.status)) + ")");
  }
  if (header.payload_len > (std::uint64_t{1} << 34)) fail(ErrorCode::kProtocol, "response: implausible payload length");
  std::string payload(header.payload_len, '\0');
  std::uint32_t crc = 0;
  if (!sock_.recv_exact(payload.data(), payload.size(), timeout_s_) && !payload.empty())
    fail(ErrorCode::kProtocol, "connection closed before payload");
  if (!sock_.recv_exact(&crc, kCrcSize, timeout_s_)) fail(ErrorCode::kProtocol, "connection closed before checksum");
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (crc32c(payload) != crc) fail(ErrorCode::kProtocol, "payload checksum mismatch");
  return payload;
}

std::pair<ChunkManifest, std::uint64_t> ChunkClient::fetch_manifest() {
  Request req;
  req.type = RequestType::kManifest;
  req.ratio = 1.0f;
  ResponseHeader h;
  double seconds = 0.0;
  const std::string payload = exchange(req, h, seconds);
  return {manifest_from_json(payload), kResponseHeaderSize + payload.size() + kCrcSize};
}

FetchResult ChunkClient::fetch_chunk(std::uint32_t chunk_id, float ratio) {
  Request req;
  req.type = RequestType::kChunk;
  req.chunk_id = chunk_id;
  req.ratio = ratio;
  ResponseHeader h;
  FetchResult r;
  const std::string payload = exchange(req, h, r.seconds);
  if (h.chunk_id != chunk_id) fail(ErrorCode::kProtocol, "response for the wrong chunk");
  r.chunk_id = chunk_id;
  r.frames = decode_frames(payload, h.frame_count);
  r.bytes = kResponseHeaderSize + payload.size() + kCrcSize;
  r.crc = crc32c(payload);
  r.goodput_bps = r.seconds > 0.0 ? 8.0 * static_cast<double>(payload.size()) / r.seconds : 0.0;
  return r;
}

}  // namespace volut

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "volut/manifest.hpp"
#include "volut/point_cloud.hpp"
#include "volut/shaper.hpp"
#include "volut/socket.hpp"
#include "volut/trace.hpp"
#include "volut/wire.hpp"

namespace volut {

// Frames are stored as <dir>/chunk_NNNNN/frame_NNN.ply.
std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t chunk, std::size_t frame);

// Seed for the server-side downsampling of one frame. The ratio is
// quantized to 1e-4 so float noise in requests does not change the subset.
std::uint64_t frame_seed(const std::string& video_id, std::uint32_t chunk, std::uint32_t frame, double ratio);

class VideoStore {
 public:
  VideoStore(ChunkManifest manifest, std::vector<std::vector<PointCloud>> frames);
  static std::shared_ptr<const VideoStore> load(const std::filesystem::path& dir,
                                                const std::filesystem::path& manifest_path);

  const ChunkManifest& manifest() const { return manifest_; }
  const PointCloud& frame(std::size_t chunk, std::size_t f) const { return frames_.at(chunk).at(f); }

 private:
  ChunkManifest manifest_;
  std::vector<std::vector<PointCloud>> frames_;
};

// Builds encoded chunk responses and keeps the most recent ones in a
// bounded LRU cache shared by all connections.
class ChunkEncoder {
 public:
  ChunkEncoder(std::shared_ptr<const VideoStore> store, std::size_t cache_capacity);

  std::shared_ptr<const std::string> manifest_response() const { return manifest_response_; }
  // Full response (header, payload, checksum) for a chunk request; an
  // unknown chunk yields a status-only response.
  std::shared_ptr<const std::string> chunk_response(std::uint32_t chunk, float ratio);

  std::uint64_t cache_hits() const;
  std::uint64_t cache_misses() const;
  std::size_t cache_size() const;

 private:
  using Key = std::uint64_t;
  std::shared_ptr<const std::string> encode(std::uint32_t chunk, float ratio) const;

  std::shared_ptr<const VideoStore> store_;
  std::shared_ptr<const std::string> manifest_response_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<Key, std::shared_ptr<const std::string>>> lru_;
  std::unordered_map<Key, decltype(lru_)::iterator> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct ServerOptions {
  Endpoint bind{"127.0.0.1", 0};
  std::optional<NetworkTrace> trace;  // per-connection shaping, clock starts at accept
  double rtt_s = 0.0;                 // added before every response
  double burst_bytes = 16384.0;
  std::size_t cache_capacity = 64;
};

class Server {
 public:
  Server(std::shared_ptr<const VideoStore> store, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  std::uint16_t port() const { return port_; }
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  std::uint64_t bytes_sent() const { return bytes_sent_.load(); }
  ChunkEncoder& encoder() { return encoder_; }

 private:
  void accept_loop();
  void serve_connection(std::shared_ptr<Socket> sock);
  // Sends `bytes`, paced by the connection's shaper if any. Returns false
  // when the server is stopping.
  bool paced_send(Socket& sock, const std::string& bytes, TraceShaper* shaper,
                  std::chrono::steady_clock::time_point epoch);
  bool sleep_until(std::chrono::steady_clock::time_point t);

  std::shared_ptr<const VideoStore> store_;
  ServerOptions options_;
  ChunkEncoder encoder_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
  std::vector<std::weak_ptr<Socket>> connections_;
  std::atomic<std::uint64_t> bytes_sent_{0};
};

struct FetchResult {
  std::uint32_t chunk_id = 0;
  std::vector<PointCloud> frames;
  std::uint64_t bytes = 0;  // whole response
  std::uint32_t crc = 0;    // verified payload checksum
  double seconds = 0.0;     // request sent to last byte received
  double goodput_bps = 0.0;
};

class ChunkClient {
 public:
  ChunkClient(const Endpoint& server, double timeout_s = 30.0);

  // Returns the manifest and the response size in bytes.
  std::pair<ChunkManifest, std::uint64_t> fetch_manifest();
  FetchResult fetch_chunk(std::uint32_t chunk_id, float ratio);

 private:
  std::string exchange(const Request& req, ResponseHeader& header, double& seconds);

  Socket sock_;
  double timeout_s_;
};

}  // namespace volut

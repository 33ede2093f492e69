#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace volut {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// "host:port"; a bare port binds/connects to 127.0.0.1.
Endpoint parse_endpoint(std::string_view text);

// Move-only owner of a connected or listening TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void close();
  // Unblocks a thread sitting in accept/recv on this socket.
  void shutdown();

  void send_all(const void* data, std::size_t len);
  // Reads exactly len bytes. Returns false on clean EOF before the first
  // byte; throws kProtocol on EOF mid-message and kTimeout when no byte
  // arrives within timeout_s (<= 0 waits forever).
  bool recv_exact(void* data, std::size_t len, double timeout_s);

 private:
  int fd_ = -1;
};

Socket listen_tcp(const Endpoint& ep, int backlog = 16);
std::uint16_t local_port(const Socket& s);
Socket accept_tcp(const Socket& listener);  // invalid socket once the listener is shut down
Socket connect_tcp(const Endpoint& ep, double timeout_s);

}  // namespace volut

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keyforge/errors.hpp"

namespace keyforge::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port" (host may be omitted: ":7100" binds everywhere).
Endpoint parse_endpoint(const std::string& text);

/// Blocking TCP stream with whole-frame send/receive. Frames are the wire
/// module's length-prefixed encoding; send_frame writes the bytes verbatim,
/// recv_frame reads exactly one frame.
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream();

  TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  static TcpStream connect(const Endpoint& ep);

  void send_frame(std::span<const std::uint8_t> frame);
  std::vector<std::uint8_t> recv_frame();

  bool valid() const { return fd_ >= 0; }

 private:
  void write_all(const std::uint8_t* data, std::size_t size);
  void read_exact(std::uint8_t* data, std::size_t size);

  int fd_ = -1;
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& ep);
  ~TcpListener();

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  TcpStream accept();
  std::uint16_t port() const { return port_; }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace keyforge::net

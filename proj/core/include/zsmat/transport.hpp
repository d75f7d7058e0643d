#pragma once

#include <memory>
#include <string>
#include <sys/types.h>

#include "zsmat/wire.hpp"

namespace zsmat {

/// Talks to a server object in the same process; used by tests and the
/// conformance runner.
class InProcessTransport final : public LineTransport {
 public:
  explicit InProcessTransport(SegmenterServer& server) : server_(server) {}
  std::string exchange(const std::string& line) override { return server_.handle_line(line); }

 private:
  SegmenterServer& server_;
};

/// Spawns `/bin/sh -c command` and exchanges lines over its stdin/stdout.
class ProcessTransport final : public LineTransport {
 public:
  explicit ProcessTransport(const std::string& command);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string exchange(const std::string& line) override;

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Line exchange over a TCP connection to host:port.
class TcpTransport final : public LineTransport {
 public:
  TcpTransport(const std::string& host, int port);
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string exchange(const std::string& line) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// Listening socket; `port == 0` picks a free port.
class TcpListener {
 public:
  explicit TcpListener(int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  /// Accepts one client and serves it until it disconnects or closes the sequence.
  void serve_one(SegmenterServer& server);

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Builds a transport from an endpoint spec: "exec:CMD" or "tcp:HOST:PORT".
/// Throws ValidationError for anything else.
std::unique_ptr<LineTransport> make_transport(const std::string& endpoint);

}  // namespace zsmat

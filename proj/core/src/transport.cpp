#include "zsmat/transport.hpp"

#include <arpa/inet.h>
#include <csignal>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>

#include <fmt/format.h>

#include "zsmat/errors.hpp"

namespace zsmat {

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw TrackingAbort(fmt::format("segmenter write failed: {}", std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string read_line(int fd, std::string& buffer) {
  for (;;) {
    const auto pos = buffer.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      return line;
    }
    char chunk[65536];
    const ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw TrackingAbort(fmt::format("segmenter read failed: {}", std::strerror(errno)));
    }
    if (n == 0) {
      throw TrackingAbort("segmenter closed the connection");
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

ProcessTransport::ProcessTransport(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
    throw TrackingAbort(fmt::format("pipe failed: {}", std::strerror(errno)));
  }
  // A segmenter that exits early must surface as a read/write error, not SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);
  pid_ = ::fork();
  if (pid_ < 0) {
    throw TrackingAbort(fmt::format("fork failed: {}", std::strerror(errno)));
  }
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessTransport::~ProcessTransport() {
  if (to_child_ >= 0) {
    ::close(to_child_);
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
  }
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

std::string ProcessTransport::exchange(const std::string& line) {
  write_all(to_child_, line + "\n");
  return read_line(from_child_, buffer_);
}

TcpTransport::TcpTransport(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw TrackingAbort(fmt::format("cannot resolve {}:{}: {}", host, port, ::gai_strerror(rc)));
  }
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd_ = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd_ < 0) {
      continue;
    }
    if (::connect(fd_, p->ai_addr, p->ai_addrlen) == 0) {
      break;
    }
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) {
    throw TrackingAbort(fmt::format("cannot connect to {}:{}", host, port));
  }
  std::signal(SIGPIPE, SIG_IGN);
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

std::string TcpTransport::exchange(const std::string& line) {
  write_all(fd_, line + "\n");
  return read_line(fd_, buffer_);
}

TcpListener::TcpListener(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) {
    throw std::runtime_error(fmt::format("socket failed: {}", std::strerror(errno)));
  }
  int yes = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 1) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error(fmt::format("cannot listen on port {}: {}", port, err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void TcpListener::serve_one(SegmenterServer& server) {
  const int client = ::accept(fd_, nullptr, nullptr);
  if (client < 0) {
    throw std::runtime_error(fmt::format("accept failed: {}", std::strerror(errno)));
  }
  std::string buffer;
  try {
    while (!server.finished()) {
      const std::string line = read_line(client, buffer);
      if (line.empty()) {
        continue;
      }
      write_all(client, server.handle_line(line) + "\n");
    }
  } catch (const TrackingAbort&) {
    // Client went away.
  }
  ::close(client);
}

std::unique_ptr<LineTransport> make_transport(const std::string& endpoint) {
  if (endpoint.rfind("exec:", 0) == 0) {
    const std::string command = endpoint.substr(5);
    if (command.empty()) {
      throw ValidationError("segmenter endpoint 'exec:' needs a command");
    }
    return std::make_unique<ProcessTransport>(command);
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    const std::string addr = endpoint.substr(4);
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
      throw ValidationError(fmt::format("segmenter endpoint '{}' must look like tcp:HOST:PORT", endpoint));
    }
    int port = 0;
    try {
      port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad port in segmenter endpoint '{}'", endpoint));
    }
    return std::make_unique<TcpTransport>(addr.substr(0, colon), port);
  }
  throw ValidationError(fmt::format("unknown segmenter endpoint '{}' (expected oracle, exec:CMD or tcp:HOST:PORT)",
                                    endpoint));
}

}  // namespace zsmat

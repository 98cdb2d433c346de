#pragma once

// HTTP transport for sessions. Requests are JSON over POST/GET/DELETE;
// push updates (step completion, errors) stream over server-sent events.
//
//   POST   /sessions               {"mode": "event"|"instruction", "seed": N}
//   GET    /sessions
//   GET    /model
//   POST   /sessions/{id}/step     {"event": "e1"}
//   POST   /sessions/{id}/choose   {"cp": "A.exit#0"}
//   GET    /sessions/{id}/state
//   GET    /sessions/{id}/log
//   DELETE /sessions/{id}
//   GET    /sessions/{id}/events   (text/event-stream)

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "constabl/program.hpp"

namespace constabl {

/// CONSTABL_PORT if set and valid, otherwise 8080.
int default_port();

class Server {
 public:
  explicit Server(std::shared_ptr<const Program> program);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  struct Response {
    int status = 200;
    std::string body;  // JSON
  };

  /// Transport-independent request handling; each session is serialized.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Push messages recorded for a session from index `from` on, each already
  /// formatted as an SSE frame.
  std::vector<std::string> pushed(const std::string& id, std::size_t from = 0) const;

  /// Binds (port 0 picks a free one) and serves on a background thread.
  /// Returns the bound port, or -1.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace constabl

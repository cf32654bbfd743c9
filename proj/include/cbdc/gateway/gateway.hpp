#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>

#include "cbdc/sim/harness.hpp"

namespace httplib {
class Server;
}

namespace cbdc::gateway {

struct Response {
  int status = 200;
  Json body;
};

// HTTP status for a protocol error code.
int status_for(ErrorCode code);

/// JSON facade over a harness. Every request takes the same lock, so actors
/// only ever see one request at a time; the gateway keeps no state of its own.
class Gateway {
 public:
  explicit Gateway(sim::Harness& harness) : harness_(harness) {}
  ~Gateway();

  // Transport-free dispatch: method, path and raw body in, JSON out.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  // Routes every endpoint (plus CORS preflight) onto the server.
  void mount(httplib::Server& server);

  // Steps the clock by one tick every `period` until stopped.
  void start_autotick(std::chrono::milliseconds period);
  void stop_autotick();

 private:
  Response dispatch(const std::string& method, const std::string& path, const Json& body);

  sim::Harness& harness_;
  std::mutex mutex_;
  std::atomic<bool> ticking_{false};
  std::thread ticker_;
};

// Serves until the process is stopped. Throws InvalidArgument if the port
// cannot be bound.
void serve(sim::Harness& harness, const std::string& host, int port, int autotick_ms = 0);

}  // namespace cbdc::gateway

#pragma once

#include <memory>
#include <string>

namespace voxelastic::service {

/// HTTP front end for the editor. Every request carries an X-Session header;
/// requests without one share the "default" session.
///
///   PUT   /world                  world JSON -> 204
///   GET   /world                  canonical world JSON
///   PUT   /special-block          [x,y,z] or null -> 204
///   GET   /properties             {"name": {"value", "unit", "default", "description"}}
///   PATCH /properties             {"name": value | null} applied atomically
///   POST  /runs                   {"mode", "seed", "radius"[, "special_block", "record_frames"]} -> 202 {"id"}
///   GET   /runs/{id}              status, progress and, once done, the result document
///   GET   /runs/{id}/frames       per-sample positions and heat-map bins, if recorded
///   GET   /runs/{id}/timeseries.csv
///   POST  /reset                  clears the session's last run
///   GET   /palette                the 16 heat-map colors
///
/// One run per session at a time; a second POST /runs while one is active is
/// answered with 409.
class Server {
 public:
  Server();
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string& host);
  /// Blocks until stop(); use after bind_to_any_port.
  bool listen_after_bind();
  /// Stops accepting requests, cancels active runs and joins their workers.
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace voxelastic::service

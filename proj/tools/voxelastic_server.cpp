#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "voxelastic/service.hpp"

namespace {
voxelastic::service::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTTP service for the voxel editor", "voxelastic_server"};
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--host", host, "Address to bind");
  app.add_option("--port", port, "Port to listen on")->check(CLI::Range(1, 65535));
  CLI11_PARSE(app, argc, argv);

  voxelastic::service::Server server;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ':' << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}

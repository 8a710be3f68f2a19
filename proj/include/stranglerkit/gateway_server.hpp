#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "stranglerkit/gateway.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// HTTP façade over the gateway core: a reverse proxy on the data path plus
// admin endpoints for routes, metrics, and the registry. Construction wires
// a real HTTP upstream caller; serve() blocks until stop().
// ---------------------------------------------------------------------------

struct GatewayServerOptions {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  bool require_auth = false;           // adds the reject-unauthenticated filter
  std::uint64_t sweep_interval_s = 5;  // health sweep cadence; 0 disables
  BreakerConfig breaker;
  std::uint64_t registry_timeout = 30;
};

class GatewayServer {
 public:
  GatewayServer(RouteTable routes, GatewayServerOptions options);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  /// Blocks serving until stop() is called from another thread or a signal
  /// handler. Returns false if the listener could not bind.
  bool serve();
  void stop();
  /// Blocks until the listener is accepting connections.
  void wait_until_ready();

  Gateway& gateway() { return *gateway_; }
  Registry& registry() { return registry_; }
  int port() const { return options_.listen_port; }

 private:
  struct HttpState;  // hides the httplib dependency from this header

  GatewayServerOptions options_;
  SteadyClock clock_;
  Registry registry_;
  BreakerRegistry breakers_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<HttpState> http_;
  std::thread sweeper_;
  std::atomic<bool> stopping_{false};
};

}  // namespace stranglerkit

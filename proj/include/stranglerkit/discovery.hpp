#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "stranglerkit/clock.hpp"
#include "stranglerkit/errors.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Service registry: registration, deregistration, heartbeat health checking,
// and round-robin selection over the healthy instances of a service. All
// operations are linearizable (one lock); the clock is injected so health
// logic is deterministic under test.
// ---------------------------------------------------------------------------

struct InstanceRecord {
  std::string service_id;
  std::string instance_id;
  std::string address;  // host:port
  std::uint64_t last_heartbeat = 0;
  bool healthy = true;

  bool operator==(const InstanceRecord&) const = default;
};

struct StatusChange {
  std::string service_id;
  std::string instance_id;
  bool now_healthy = false;

  bool operator==(const StatusChange&) const = default;
};

class Registry {
 public:
  /// An instance is unhealthy when now - last_heartbeat > timeout at the
  /// most recent sweep. Default: 3 missed intervals of 10 time units.
  explicit Registry(const Clock& clock, std::uint64_t timeout = 30);

  /// Throws DuplicateInstance when the id is already registered under the
  /// service. New instances start healthy with last_heartbeat = now.
  void register_instance(const std::string& service_id,
                         const std::string& instance_id,
                         const std::string& address);

  /// Throws UnknownInstance. The round-robin cursor skips the slot.
  void deregister(const std::string& service_id,
                  const std::string& instance_id);

  /// Refreshes last_heartbeat (to `at`, or the clock's now). Health flips
  /// only at sweeps. Throws UnknownInstance.
  void heartbeat(const std::string& service_id, const std::string& instance_id);
  void heartbeat_at(const std::string& service_id,
                    const std::string& instance_id, std::uint64_t at);

  /// Re-evaluates every instance's health against the timeout; returns the
  /// instances whose status flipped (either direction). Idempotent for a
  /// fixed now.
  std::vector<StatusChange> sweep();

  /// Cycles through healthy instances in registration order, advancing the
  /// per-service cursor one healthy position per call. Throws UnknownService
  /// for a never-registered service and NoHealthyInstance when the service
  /// has no healthy instance.
  InstanceRecord next_instance(const std::string& service_id);

  /// Instances in registration order. Throws UnknownService.
  std::vector<InstanceRecord> list(const std::string& service_id) const;

  /// Services with at least one registration ever, sorted.
  std::vector<std::string> services() const;

  std::uint64_t timeout() const { return timeout_; }

 private:
  struct ServiceEntry {
    std::vector<InstanceRecord> instances;  // registration order
    std::size_t cursor = 0;                 // next slot to consider
  };

  const Clock& clock_;
  std::uint64_t timeout_;
  mutable std::mutex mu_;
  std::map<std::string, ServiceEntry> services_;
};

}  // namespace stranglerkit

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stranglerkit/discovery.hpp"
#include "stranglerkit/model.hpp"
#include "stranglerkit/resilience.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// The strangler-fig edge: deterministic traffic shifting between the legacy
// monolith and extracted services by longest path prefix and key-hash
// bucket, behind a fixed filter chain. The route table is replaced by atomic
// snapshot swap; the data path never observes a partial update.
// ---------------------------------------------------------------------------

struct RouteTable {
  std::vector<RouteEntry> entries;

  bool operator==(const RouteTable&) const = default;
};

struct RouteDecision {
  std::string target_service;
  std::string matched_prefix;
  bool to_extracted = false;

  bool operator==(const RouteDecision&) const = default;
};

/// Longest-prefix match, then bucket split: the request goes to the
/// extracted target iff bucket_of(key) < shift_percent. Deterministic for a
/// fixed key. Throws NoRouteMatched.
RouteDecision route(const RouteTable& table, const std::string& path,
                    const std::string& key);

/// Returns a copy with only the named entry's shift changed. Throws
/// UnknownRoute and InvalidPercent (out of range, or positive percent on an
/// entry with no extracted target).
RouteTable set_shift(const RouteTable& table, const std::string& path_prefix,
                     int percent);

enum class FilterPhase { Pre, Post };
enum class FilterBehavior { RequestLogging, MetricsCount, RejectUnauthenticated };

struct Filter {
  std::string name;
  FilterPhase phase = FilterPhase::Pre;
  FilterBehavior behavior = FilterBehavior::RequestLogging;
};

struct GatewayRequest {
  std::string path;
  std::string key;    // routing key (X-Routing-Key header, else the path)
  std::string token;  // auth stub: any non-empty token is accepted
  std::string body;
  std::string method = "GET";
};

struct GatewayResponse {
  int status = 0;
  std::string body;
  bool cached = false;       // provenance from the breaker
  std::string target;        // service the request was routed to
  std::string error;         // error code name when status >= 400
};

struct GatewayMetrics {
  std::uint64_t routed_legacy = 0;
  std::uint64_t routed_extracted = 0;
  std::uint64_t unrouted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t requests_total = 0;  // metrics-count filter
  std::uint64_t logged = 0;          // request-logging filter (pre + post)

  bool operator==(const GatewayMetrics&) const = default;
};

/// Performs the upstream call for a routing decision; the gateway core is
/// transport-agnostic (the HTTP server injects a real client, tests inject
/// stubs).
using UpstreamCaller =
    std::function<UpstreamResult(const InstanceRecord& instance,
                                 const GatewayRequest& request)>;

class Gateway {
 public:
  Gateway(Registry& registry, BreakerRegistry& breakers,
          std::vector<Filter> filters, RouteTable routes,
          UpstreamCaller caller);

  /// Pre filters in declared order (reject-unauthenticated short-circuits),
  /// route, pick an instance, call through the breaker, post filters.
  /// Exactly one of {routed_legacy, routed_extracted, unrouted, rejected} is
  /// incremented per request. Errors are returned as statuses, not thrown:
  /// 401 rejected, 404 NoRouteMatched, 503 NoHealthyInstance/UnknownService,
  /// 502 UpstreamFailure.
  GatewayResponse handle(const GatewayRequest& request);

  /// Atomic snapshot swap; in-flight requests keep the table they started
  /// with. Throws UnknownRoute / InvalidPercent.
  void shift(const std::string& path_prefix, int percent);
  void replace_routes(RouteTable table);
  std::shared_ptr<const RouteTable> snapshot() const;

  GatewayMetrics metrics() const;
  const std::vector<Filter>& filters() const { return filters_; }
  Registry& registry() { return registry_; }
  BreakerRegistry& breakers() { return breakers_; }

  /// Observable side-effect hook for the request-logging filter; tests use
  /// it to assert filter ordering.
  void set_log_sink(std::function<void(const std::string&)> sink);

 private:
  Registry& registry_;
  BreakerRegistry& breakers_;
  std::vector<Filter> filters_;
  std::shared_ptr<const RouteTable> routes_;
  mutable std::mutex routes_mu_;
  UpstreamCaller caller_;
  std::function<void(const std::string&)> log_sink_;

  std::atomic<std::uint64_t> routed_legacy_{0};
  std::atomic<std::uint64_t> routed_extracted_{0};
  std::atomic<std::uint64_t> unrouted_{0};
  std::atomic<std::uint64_t> rejected_{0};
  std::atomic<std::uint64_t> requests_total_{0};
  std::atomic<std::uint64_t> logged_{0};
};

/// The route table a model document declares, as the gateway's starting
/// snapshot.
RouteTable routes_from_model(const SystemModel& model);

}  // namespace stranglerkit

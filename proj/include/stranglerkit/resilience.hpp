#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stranglerkit/clock.hpp"
#include "stranglerkit/errors.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Circuit breaker with a cached-last-good-result fallback. The transition
// logic is a pure function (record_outcome) over an explicit state value so
// it can be checked exhaustively against an independent automaton; the
// stateful registry composes it with upstream invocation and the cache.
// ---------------------------------------------------------------------------

struct BreakerConfig {
  int failure_threshold = 5;       // consecutive failures that open the circuit
  std::uint64_t cooldown = 30;     // time units Open before a probe is allowed
  std::uint64_t call_timeout = 2;  // upstream budget; a timeout is a failure

  bool operator==(const BreakerConfig&) const = default;
};

enum class BreakerPhase { Closed, Open, HalfOpen };

struct BreakerState {
  BreakerPhase phase = BreakerPhase::Closed;
  int consecutive_failures = 0;  // meaningful while Closed
  std::uint64_t opened_at = 0;   // meaningful while Open

  bool operator==(const BreakerState&) const = default;
};

enum class Outcome { Success, Failure };

/// The phase the breaker is effectively in at `now`: a stored Open state
/// whose cooldown has elapsed admits a probe, i.e. is HalfOpen.
BreakerPhase effective_phase(const BreakerState& state, std::uint64_t now,
                             const BreakerConfig& config);

/// Pure transition function. Closed: success resets the failure count,
/// failure increments it and opens the circuit at the threshold. HalfOpen
/// (stored Open, cooldown elapsed): success closes, failure re-opens with a
/// fresh opened_at. Open within cooldown: identity — no upstream call can
/// have produced an outcome.
BreakerState record_outcome(const BreakerState& state, Outcome outcome,
                            std::uint64_t now, const BreakerConfig& config);

const char* breaker_phase_name(BreakerPhase phase);

/// Bounded map with least-recently-used eviction. Only successful responses
/// are stored.
class ResultCache {
 public:
  explicit ResultCache(std::size_t capacity = 1024);
  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, const std::string& value);
  std::size_t size() const;

 private:
  std::size_t capacity_;
  std::list<std::pair<std::string, std::string>> order_;  // front = freshest
  std::unordered_map<std::string,
                     std::list<std::pair<std::string, std::string>>::iterator>
      index_;
};

struct UpstreamResult {
  bool ok = false;
  std::string body;
};
using UpstreamFn = std::function<UpstreamResult()>;

struct BreakerCallResult {
  std::string body;
  bool cached = false;  // provenance: false = live
};

struct BreakerStats {
  BreakerState state;
  std::uint64_t live_calls = 0;
  std::uint64_t failures = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t short_circuited = 0;  // rejected while Open, no upstream call
};

/// Per-service breakers plus the shared result cache. Calls for one service
/// are serialized, which also makes the HalfOpen window admit exactly one
/// probe. Fallback policy: any attempt that cannot return a live response —
/// open circuit, failed call, failed probe — serves the cached result for
/// (service, request digest) when warm, else throws UpstreamFailure.
class BreakerRegistry {
 public:
  explicit BreakerRegistry(const Clock& clock, BreakerConfig config = {},
                           std::size_t cache_capacity = 1024);

  BreakerCallResult call(const std::string& service_id,
                         const std::string& request_digest,
                         const UpstreamFn& upstream);

  BreakerState state(const std::string& service_id) const;
  BreakerPhase phase(const std::string& service_id) const;
  BreakerStats stats(const std::string& service_id) const;
  std::vector<std::string> services() const;
  const BreakerConfig& config() const { return config_; }

 private:
  struct PerService {
    BreakerState state;
    std::uint64_t live_calls = 0;
    std::uint64_t failures = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t short_circuited = 0;
    std::mutex mu;
  };

  PerService& entry(const std::string& service_id);

  const Clock& clock_;
  BreakerConfig config_;
  mutable std::mutex registry_mu_;
  std::map<std::string, std::unique_ptr<PerService>> services_;
  mutable std::mutex cache_mu_;
  ResultCache cache_;
};

}  // namespace stranglerkit

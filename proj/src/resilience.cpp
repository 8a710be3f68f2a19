#include "stranglerkit/resilience.hpp"

#include <memory>
#include <vector>

namespace stranglerkit {

const char* breaker_phase_name(BreakerPhase phase) {
  switch (phase) {
    case BreakerPhase::Closed: return "closed";
    case BreakerPhase::Open: return "open";
    case BreakerPhase::HalfOpen: return "half-open";
  }
  return "closed";
}

BreakerPhase effective_phase(const BreakerState& state, std::uint64_t now,
                             const BreakerConfig& config) {
  if (state.phase == BreakerPhase::Open) {
    return now - std::min(state.opened_at, now) >= config.cooldown
               ? BreakerPhase::HalfOpen
               : BreakerPhase::Open;
  }
  return state.phase;
}

BreakerState record_outcome(const BreakerState& state, Outcome outcome,
                            std::uint64_t now, const BreakerConfig& config) {
  switch (effective_phase(state, now, config)) {
    case BreakerPhase::Closed: {
      if (outcome == Outcome::Success) {
        return BreakerState{BreakerPhase::Closed, 0, 0};
      }
      int failures = state.consecutive_failures + 1;
      if (failures >= config.failure_threshold) {
        return BreakerState{BreakerPhase::Open, 0, now};
      }
      return BreakerState{BreakerPhase::Closed, failures, 0};
    }
    case BreakerPhase::HalfOpen:
      return outcome == Outcome::Success
                 ? BreakerState{BreakerPhase::Closed, 0, 0}
                 : BreakerState{BreakerPhase::Open, 0, now};
    case BreakerPhase::Open:
      // No upstream call ran; nothing to record.
      return state;
  }
  return state;
}

ResultCache::ResultCache(std::size_t capacity) : capacity_(capacity) {}

std::optional<std::string> ResultCache::get(const std::string& key) {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void ResultCache::put(const std::string& key, const std::string& value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    it->second->second = value;
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, value);
  index_[key] = order_.begin();
  if (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t ResultCache::size() const { return order_.size(); }

BreakerRegistry::BreakerRegistry(const Clock& clock, BreakerConfig config,
                                 std::size_t cache_capacity)
    : clock_(clock), config_(config), cache_(cache_capacity) {}

BreakerRegistry::PerService& BreakerRegistry::entry(
    const std::string& service_id) {
  std::lock_guard<std::mutex> lock(registry_mu_);
  auto it = services_.find(service_id);
  if (it == services_.end()) {
    it = services_.emplace(service_id, std::make_unique<PerService>()).first;
  }
  return *it->second;
}

BreakerCallResult BreakerRegistry::call(const std::string& service_id,
                                        const std::string& request_digest,
                                        const UpstreamFn& upstream) {
  PerService& svc = entry(service_id);
  // Per-service serialization: exactly one caller runs the HalfOpen probe;
  // contenders queue behind it and observe the resolved state.
  std::lock_guard<std::mutex> call_lock(svc.mu);
  std::string cache_key = service_id + "\x1f" + request_digest;
  std::uint64_t now = clock_.now();

  auto cached = [&]() -> std::optional<std::string> {
    std::lock_guard<std::mutex> lock(cache_mu_);
    return cache_.get(cache_key);
  };
  auto store = [&](const std::string& body) {
    std::lock_guard<std::mutex> lock(cache_mu_);
    cache_.put(cache_key, body);
  };

  BreakerPhase phase = effective_phase(svc.state, now, config_);
  if (phase == BreakerPhase::Open) {
    svc.short_circuited++;
    if (auto hit = cached()) {
      svc.cache_hits++;
      return BreakerCallResult{*hit, true};
    }
    throw Error(ErrorCode::UpstreamFailure,
                "circuit open for " + service_id + " and no cached result");
  }

  // Closed or HalfOpen: invoke the upstream (the probe, when HalfOpen).
  svc.live_calls++;
  UpstreamResult result = upstream();
  now = clock_.now();
  svc.state = record_outcome(
      svc.state, result.ok ? Outcome::Success : Outcome::Failure, now, config_);
  if (result.ok) {
    store(result.body);
    return BreakerCallResult{result.body, false};
  }
  svc.failures++;
  if (auto hit = cached()) {
    svc.cache_hits++;
    return BreakerCallResult{*hit, true};
  }
  throw Error(ErrorCode::UpstreamFailure,
              "upstream call to " + service_id + " failed and no cached result");
}

BreakerState BreakerRegistry::state(const std::string& service_id) const {
  auto& self = const_cast<BreakerRegistry&>(*this);
  PerService& svc = self.entry(service_id);
  std::lock_guard<std::mutex> lock(svc.mu);
  return svc.state;
}

BreakerPhase BreakerRegistry::phase(const std::string& service_id) const {
  return effective_phase(state(service_id), clock_.now(), config_);
}

BreakerStats BreakerRegistry::stats(const std::string& service_id) const {
  auto& self = const_cast<BreakerRegistry&>(*this);
  PerService& svc = self.entry(service_id);
  std::lock_guard<std::mutex> lock(svc.mu);
  return BreakerStats{svc.state, svc.live_calls, svc.failures, svc.cache_hits,
                      svc.short_circuited};
}

std::vector<std::string> BreakerRegistry::services() const {
  std::lock_guard<std::mutex> lock(registry_mu_);
  std::vector<std::string> out;
  out.reserve(services_.size());
  for (const auto& [id, entry] : services_) out.push_back(id);
  return out;
}

}  // namespace stranglerkit

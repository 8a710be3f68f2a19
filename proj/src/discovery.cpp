#include "stranglerkit/discovery.hpp"

#include <algorithm>

namespace stranglerkit {

Registry::Registry(const Clock& clock, std::uint64_t timeout)
    : clock_(clock), timeout_(timeout) {}

void Registry::register_instance(const std::string& service_id,
                                 const std::string& instance_id,
                                 const std::string& address) {
  std::lock_guard<std::mutex> lock(mu_);
  ServiceEntry& entry = services_[service_id];
  for (const auto& inst : entry.instances) {
    if (inst.instance_id == instance_id) {
      throw Error(ErrorCode::DuplicateInstance,
                  instance_id + " already registered under " + service_id);
    }
  }
  entry.instances.push_back(
      InstanceRecord{service_id, instance_id, address, clock_.now(), true});
}

void Registry::deregister(const std::string& service_id,
                          const std::string& instance_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto sit = services_.find(service_id);
  if (sit == services_.end()) {
    throw Error(ErrorCode::UnknownInstance,
                service_id + "/" + instance_id + " not registered");
  }
  auto& instances = sit->second.instances;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].instance_id != instance_id) continue;
    instances.erase(instances.begin() + static_cast<std::ptrdiff_t>(i));
    // Keep the cursor pointing at the same next candidate.
    if (sit->second.cursor > i) sit->second.cursor--;
    if (!instances.empty()) sit->second.cursor %= instances.size();
    if (instances.empty()) sit->second.cursor = 0;
    return;
  }
  throw Error(ErrorCode::UnknownInstance,
              service_id + "/" + instance_id + " not registered");
}

void Registry::heartbeat(const std::string& service_id,
                         const std::string& instance_id) {
  heartbeat_at(service_id, instance_id, clock_.now());
}

void Registry::heartbeat_at(const std::string& service_id,
                            const std::string& instance_id, std::uint64_t at) {
  std::lock_guard<std::mutex> lock(mu_);
  auto sit = services_.find(service_id);
  if (sit != services_.end()) {
    for (auto& inst : sit->second.instances) {
      if (inst.instance_id == instance_id) {
        inst.last_heartbeat = std::max(inst.last_heartbeat, at);
        return;
      }
    }
  }
  throw Error(ErrorCode::UnknownInstance,
              service_id + "/" + instance_id + " not registered");
}

std::vector<StatusChange> Registry::sweep() {
  std::lock_guard<std::mutex> lock(mu_);
  std::uint64_t now = clock_.now();
  std::vector<StatusChange> changes;
  for (auto& [service_id, entry] : services_) {
    for (auto& inst : entry.instances) {
      bool fresh = now - std::min(inst.last_heartbeat, now) <= timeout_;
      if (fresh != inst.healthy) {
        inst.healthy = fresh;
        changes.push_back(StatusChange{service_id, inst.instance_id, fresh});
      }
    }
  }
  return changes;
}

InstanceRecord Registry::next_instance(const std::string& service_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto sit = services_.find(service_id);
  if (sit == services_.end()) {
    throw Error(ErrorCode::UnknownService, "no such service: " + service_id);
  }
  auto& entry = sit->second;
  std::size_t n = entry.instances.size();
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t idx = (entry.cursor + step) % n;
    if (entry.instances[idx].healthy) {
      entry.cursor = (idx + 1) % n;
      return entry.instances[idx];
    }
  }
  throw Error(ErrorCode::NoHealthyInstance,
              "service " + service_id + " has no healthy instance");
}

std::vector<InstanceRecord> Registry::list(const std::string& service_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto sit = services_.find(service_id);
  if (sit == services_.end()) {
    throw Error(ErrorCode::UnknownService, "no such service: " + service_id);
  }
  return sit->second.instances;
}

std::vector<std::string> Registry::services() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> out;
  out.reserve(services_.size());
  for (const auto& [id, entry] : services_) out.push_back(id);
  return out;
}

}  // namespace stranglerkit

#include "stranglerkit/gateway.hpp"

#include "stranglerkit/hash.hpp"

namespace stranglerkit {

RouteDecision route(const RouteTable& table, const std::string& path,
                    const std::string& key) {
  const RouteEntry* best = nullptr;
  for (const auto& r : table.entries) {
    if (path.rfind(r.path_prefix, 0) != 0) continue;
    if (best == nullptr || r.path_prefix.size() > best->path_prefix.size()) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::NoRouteMatched, "no route matches " + path);
  }
  bool extracted =
      !best->extracted_target.empty() && bucket_of(key) < best->shift_percent;
  return RouteDecision{extracted ? best->extracted_target : best->legacy_target,
                       best->path_prefix, extracted};
}

RouteTable set_shift(const RouteTable& table, const std::string& path_prefix,
                     int percent) {
  if (percent < 0 || percent > 100) {
    throw Error(ErrorCode::InvalidPercent,
                "shift percent " + std::to_string(percent) +
                    " outside [0,100]");
  }
  RouteTable out = table;
  for (auto& r : out.entries) {
    if (r.path_prefix != path_prefix) continue;
    if (percent > 0 && r.extracted_target.empty()) {
      throw Error(ErrorCode::InvalidPercent,
                  "route " + path_prefix + " has no extracted target");
    }
    r.shift_percent = percent;
    return out;
  }
  throw Error(ErrorCode::UnknownRoute, "no route with prefix " + path_prefix);
}

RouteTable routes_from_model(const SystemModel& model) {
  return RouteTable{model.routes};
}

Gateway::Gateway(Registry& registry, BreakerRegistry& breakers,
                 std::vector<Filter> filters, RouteTable routes,
                 UpstreamCaller caller)
    : registry_(registry),
      breakers_(breakers),
      filters_(std::move(filters)),
      routes_(std::make_shared<const RouteTable>(std::move(routes))),
      caller_(std::move(caller)) {}

void Gateway::set_log_sink(std::function<void(const std::string&)> sink) {
  log_sink_ = std::move(sink);
}

std::shared_ptr<const RouteTable> Gateway::snapshot() const {
  std::lock_guard<std::mutex> lock(routes_mu_);
  return routes_;
}

void Gateway::replace_routes(RouteTable table) {
  auto next = std::make_shared<const RouteTable>(std::move(table));
  std::lock_guard<std::mutex> lock(routes_mu_);
  routes_ = std::move(next);
}

void Gateway::shift(const std::string& path_prefix, int percent) {
  std::lock_guard<std::mutex> lock(routes_mu_);
  auto next = std::make_shared<const RouteTable>(
      set_shift(*routes_, path_prefix, percent));
  routes_ = std::move(next);
}

GatewayResponse Gateway::handle(const GatewayRequest& request) {
  auto run_filters = [this, &request](FilterPhase phase) -> bool {
    for (const auto& f : filters_) {
      if (f.phase != phase) continue;
      switch (f.behavior) {
        case FilterBehavior::RequestLogging:
          logged_++;
          if (log_sink_) {
            log_sink_((phase == FilterPhase::Pre ? "pre " : "post ") + f.name +
                      " " + request.method + " " + request.path);
          }
          break;
        case FilterBehavior::MetricsCount:
          if (phase == FilterPhase::Pre) requests_total_++;
          break;
        case FilterBehavior::RejectUnauthenticated:
          if (phase == FilterPhase::Pre && request.token.empty()) return false;
          break;
      }
    }
    return true;
  };

  if (!run_filters(FilterPhase::Pre)) {
    rejected_++;
    GatewayResponse resp;
    resp.status = 401;
    resp.error = "Unauthorized";
    resp.body = "{\"error\":\"missing token\"}";
    run_filters(FilterPhase::Post);
    return resp;
  }

  std::shared_ptr<const RouteTable> table = snapshot();
  RouteDecision decision;
  try {
    decision = route(*table, request.path, request.key);
  } catch (const Error& e) {
    unrouted_++;
    GatewayResponse resp;
    resp.status = 404;
    resp.error = error_code_name(e.code());
    resp.body = std::string("{\"error\":\"") + e.what() + "\"}";
    run_filters(FilterPhase::Post);
    return resp;
  }
  if (decision.to_extracted) {
    routed_extracted_++;
  } else {
    routed_legacy_++;
  }

  GatewayResponse resp;
  resp.target = decision.target_service;
  try {
    InstanceRecord instance = registry_.next_instance(decision.target_service);
    DigestBuilder digest(0);
    digest.add(request.method);
    digest.add(request.path);
    digest.add(request.key);
    digest.add(request.body);
    BreakerCallResult result = breakers_.call(
        decision.target_service, digest.hex(),
        [this, &instance, &request]() { return caller_(instance, request); });
    resp.status = 200;
    resp.body = result.body;
    resp.cached = result.cached;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::NoHealthyInstance:
      case ErrorCode::UnknownService:
        resp.status = 503;
        break;
      case ErrorCode::UpstreamFailure:
        resp.status = 502;
        break;
      default:
        resp.status = 500;
        break;
    }
    resp.error = error_code_name(e.code());
    resp.body = std::string("{\"error\":\"") + e.what() + "\"}";
  }
  run_filters(FilterPhase::Post);
  return resp;
}

GatewayMetrics Gateway::metrics() const {
  GatewayMetrics m;
  m.routed_legacy = routed_legacy_.load();
  m.routed_extracted = routed_extracted_.load();
  m.unrouted = unrouted_.load();
  m.rejected = rejected_.load();
  m.requests_total = requests_total_.load();
  m.logged = logged_.load();
  return m;
}

}  // namespace stranglerkit

#include "stranglerkit/gateway_server.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"

namespace stranglerkit {

using nlohmann::json;

namespace {

json route_to_json(const RouteEntry& r) {
  json j;
  j["path_prefix"] = r.path_prefix;
  j["legacy_target"] = r.legacy_target;
  if (r.extracted_target.empty()) {
    j["extracted_target"] = nullptr;
  } else {
    j["extracted_target"] = r.extracted_target;
  }
  j["shift_percent"] = r.shift_percent;
  return j;
}

void reply_error(httplib::Response& res, int status, const Error& e) {
  res.status = status;
  json j;
  j["error"] = error_code_name(e.code());
  j["detail"] = e.what();
  res.set_content(j.dump(), "application/json");
}

int status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::DuplicateInstance: return 409;
    case ErrorCode::UnknownInstance:
    case ErrorCode::UnknownService:
    case ErrorCode::UnknownRoute: return 404;
    case ErrorCode::InvalidPercent:
    case ErrorCode::ParseError: return 400;
    default: return 500;
  }
}

/// host:port -> (host, port); defaults to port 80.
std::pair<std::string, int> split_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) return {address, 80};
  return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
}

}  // namespace

struct GatewayServer::HttpState {
  httplib::Server server;
};

GatewayServer::GatewayServer(RouteTable routes, GatewayServerOptions options)
    : options_(std::move(options)),
      registry_(clock_, options_.registry_timeout),
      breakers_(clock_, options_.breaker),
      http_(std::make_unique<HttpState>()) {
  std::vector<Filter> filters{
      Filter{"request-log", FilterPhase::Pre, FilterBehavior::RequestLogging},
      Filter{"metrics", FilterPhase::Pre, FilterBehavior::MetricsCount},
  };
  if (options_.require_auth) {
    filters.push_back(Filter{"auth", FilterPhase::Pre,
                             FilterBehavior::RejectUnauthenticated});
  }

  std::uint64_t timeout_s = options_.breaker.call_timeout;
  UpstreamCaller caller = [timeout_s](const InstanceRecord& instance,
                                      const GatewayRequest& request) {
    auto [host, port] = split_address(instance.address);
    httplib::Client client(host, port);
    client.set_connection_timeout(static_cast<time_t>(timeout_s));
    client.set_read_timeout(static_cast<time_t>(timeout_s));
    httplib::Result result;
    if (request.method == "POST") {
      result = client.Post(request.path, request.body, "application/json");
    } else if (request.method == "PUT") {
      result = client.Put(request.path, request.body, "application/json");
    } else if (request.method == "DELETE") {
      result = client.Delete(request.path);
    } else {
      result = client.Get(request.path);
    }
    if (!result || result->status >= 500) return UpstreamResult{false, {}};
    return UpstreamResult{true, result->body};
  };

  gateway_ = std::make_unique<Gateway>(registry_, breakers_,
                                       std::move(filters), std::move(routes),
                                       std::move(caller));

  httplib::Server& svr = http_->server;

  svr.Get("/admin/routes", [this](const httplib::Request&,
                                  httplib::Response& res) {
    json j = json::array();
    for (const auto& r : gateway_->snapshot()->entries) {
      j.push_back(route_to_json(r));
    }
    res.set_content(j.dump(2), "application/json");
  });

  svr.Put(R"(/admin/routes/(.+)/shift)", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    std::string prefix = req.matches[1];
    try {
      json body = json::parse(req.body);
      int percent = body.at("percent").get<int>();
      gateway_->shift(prefix, percent);
      json j;
      j["path_prefix"] = prefix;
      j["shift_percent"] = percent;
      res.set_content(j.dump(), "application/json");
    } catch (const json::exception& e) {
      reply_error(res, 400, Error(ErrorCode::ParseError, e.what()));
    } catch (const Error& e) {
      reply_error(res, status_for(e), e);
    }
  });

  svr.Get("/admin/metrics", [this](const httplib::Request&,
                                   httplib::Response& res) {
    GatewayMetrics m = gateway_->metrics();
    json j;
    j["routed_legacy"] = m.routed_legacy;
    j["routed_extracted"] = m.routed_extracted;
    j["unrouted"] = m.unrouted;
    j["rejected"] = m.rejected;
    j["requests_total"] = m.requests_total;
    j["logged"] = m.logged;
    json breakers = json::object();
    for (const auto& svc : breakers_.services()) {
      BreakerStats st = breakers_.stats(svc);
      json b;
      b["phase"] = breaker_phase_name(breakers_.phase(svc));
      b["consecutive_failures"] = st.state.consecutive_failures;
      b["live_calls"] = st.live_calls;
      b["failures"] = st.failures;
      b["cache_hits"] = st.cache_hits;
      b["short_circuited"] = st.short_circuited;
      breakers[svc] = b;
    }
    j["breakers"] = breakers;
    res.set_content(j.dump(2), "application/json");
  });

  svr.Post(R"(/registry/([^/]+)/instances)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    std::string service = req.matches[1];
    try {
      json body = json::parse(req.body);
      registry_.register_instance(service,
                                  body.at("instance_id").get<std::string>(),
                                  body.at("address").get<std::string>());
      json j;
      j["registered"] = true;
      res.set_content(j.dump(), "application/json");
    } catch (const json::exception& e) {
      reply_error(res, 400, Error(ErrorCode::ParseError, e.what()));
    } catch (const Error& e) {
      reply_error(res, status_for(e), e);
    }
  });

  svr.Delete(R"(/registry/([^/]+)/instances/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               try {
                 registry_.deregister(req.matches[1], req.matches[2]);
                 json j;
                 j["deregistered"] = true;
                 res.set_content(j.dump(), "application/json");
               } catch (const Error& e) {
                 reply_error(res, status_for(e), e);
               }
             });

  svr.Put(R"(/registry/([^/]+)/instances/([^/]+)/heartbeat)",
          [this](const httplib::Request& req, httplib::Response& res) {
            try {
              registry_.heartbeat(req.matches[1], req.matches[2]);
              json j;
              j["heartbeat"] = true;
              res.set_content(j.dump(), "application/json");
            } catch (const Error& e) {
              reply_error(res, status_for(e), e);
            }
          });

  svr.Get(R"(/registry/([^/]+))", [this](const httplib::Request& req,
                                         httplib::Response& res) {
    try {
      json instances = json::array();
      for (const auto& inst : registry_.list(req.matches[1])) {
        json j;
        j["instance_id"] = inst.instance_id;
        j["address"] = inst.address;
        j["last_heartbeat"] = inst.last_heartbeat;
        j["healthy"] = inst.healthy;
        instances.push_back(j);
      }
      json j;
      j["service"] = std::string(req.matches[1]);
      j["instances"] = instances;
      res.set_content(j.dump(2), "application/json");
    } catch (const Error& e) {
      reply_error(res, status_for(e), e);
    }
  });

  // Data path: everything else is proxied.
  auto proxy = [this](const httplib::Request& req, httplib::Response& res) {
    GatewayRequest greq;
    greq.path = req.path;
    greq.key = req.get_header_value("X-Routing-Key");
    if (greq.key.empty()) greq.key = req.path;
    greq.token = req.get_header_value("Authorization");
    greq.body = req.body;
    greq.method = req.method;
    GatewayResponse gres = gateway_->handle(greq);
    res.status = gres.status;
    res.set_header("X-Provenance", gres.cached ? "cached" : "live");
    if (!gres.target.empty()) res.set_header("X-Target", gres.target);
    if (!gres.error.empty()) res.set_header("X-Error", gres.error);
    res.set_content(gres.body, "application/json");
  };
  svr.Get(".*", proxy);
  svr.Post(".*", proxy);
  svr.Put(".*", proxy);
  svr.Delete(".*", proxy);

  if (options_.sweep_interval_s > 0) {
    sweeper_ = std::thread([this]() {
      std::uint64_t interval_ms = options_.sweep_interval_s * 1000;
      std::uint64_t elapsed = 0;
      while (!stopping_.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        elapsed += 100;
        if (elapsed >= interval_ms) {
          elapsed = 0;
          registry_.sweep();
        }
      }
    });
  }
}

GatewayServer::~GatewayServer() {
  stop();
  if (sweeper_.joinable()) sweeper_.join();
}

bool GatewayServer::serve() {
  return http_->server.listen(options_.listen_host, options_.listen_port);
}

void GatewayServer::stop() {
  stopping_.store(true);
  http_->server.stop();
}

void GatewayServer::wait_until_ready() { http_->server.wait_until_ready(); }

}  // namespace stranglerkit

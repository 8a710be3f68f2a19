// stranglerkit: monolith-to-microservice migration toolkit.
//
// Subcommands: analyze, plan, apply, rollback, simulate, db (sync-status /
// cutover / verify), gateway serve, registry (admin client), stub-upstream
// (test double for gateway integration runs).
//
// Exit codes: 0 success, 1 findings (validation violations, divergence) or
// runtime error, 2 usage error.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "stranglerkit/analysis.hpp"
#include "stranglerkit/dbsplit.hpp"
#include "stranglerkit/gateway_server.hpp"
#include "stranglerkit/hash.hpp"
#include "stranglerkit/model.hpp"
#include "stranglerkit/planner.hpp"
#include "stranglerkit/simulator.hpp"

namespace sk = stranglerkit;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw sk::Error(sk::ErrorCode::UsageError, "cannot open file: " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw sk::Error(sk::ErrorCode::UsageError, "cannot write file: " + path);
  }
  out << content;
}

/// Seed precedence: --seed flag > STRANGLERKIT_SEED > 0.
std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
  if (flag_given) return flag_value;
  const char* env = std::getenv("STRANGLERKIT_SEED");
  if (env != nullptr && *env != '\0') {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

std::pair<std::string, int> split_listen(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw sk::Error(sk::ErrorCode::UsageError,
                    "listen address must be host:port, got " + addr);
  }
  return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

int cmd_analyze(const std::string& model_path, bool as_json, bool unweighted,
                bool infer, int threshold, std::uint64_t seed) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::ContextGraph graph = sk::build_context_graph(model, !unweighted);
  std::vector<sk::CouplingScore> scores = sk::coupling_scores(graph);
  std::vector<std::string> ranking = sk::rank_candidates(graph);

  if (as_json) {
    json j;
    j["scores"] = json::array();
    for (const auto& s : scores) {
      j["scores"].push_back(json{{"context", s.context},
                                 {"in_degree", s.in_degree},
                                 {"out_degree", s.out_degree},
                                 {"total", s.total}});
    }
    j["ranking"] = ranking;
    if (infer) {
      sk::ContextProposal proposal = sk::infer_contexts(model, seed, threshold);
      j["proposed_contexts"] = proposal.labels;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << "coupling scores (in + out = total):\n";
  for (const auto& s : scores) {
    std::cout << "  " << s.context << ": " << s.in_degree << " + "
              << s.out_degree << " = " << s.total << "\n";
  }
  std::cout << "extraction order (least coupled first):\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    std::cout << "  " << (i + 1) << ". " << ranking[i] << "\n";
  }
  if (infer) {
    sk::ContextProposal proposal = sk::infer_contexts(model, seed, threshold);
    std::cout << "proposed contexts (advisory, threshold " << threshold
              << "):\n";
    for (const auto& [mid, label] : proposal.labels) {
      std::cout << "  " << mid << " -> " << label << "\n";
    }
  }
  return 0;
}

int cmd_validate(const std::string& model_path, bool as_json) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  std::vector<sk::Violation> violations = sk::validate(model);
  if (as_json) {
    json j = json::array();
    for (const auto& v : violations) {
      j.push_back(json{{"rule", v.rule}, {"subject", v.subject},
                       {"detail", v.detail}});
    }
    std::cout << j.dump(2) << "\n";
  } else if (violations.empty()) {
    std::cout << "model is valid and isolated\n";
  } else {
    for (const auto& v : violations) {
      std::cout << v.rule << " (" << v.subject << "): " << v.detail << "\n";
    }
  }
  return violations.empty() ? 0 : 1;
}

int cmd_plan(const std::string& model_path, const std::string& target,
             const std::vector<int>& shifts, const std::string& out_path,
             bool as_json) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::MigrationPlan plan = sk::generate_plan(
      model, target, shifts.empty() ? std::vector<int>{10, 50, 100} : shifts);
  std::string serialized = sk::serialize_plan(plan);
  if (!out_path.empty()) {
    write_file(out_path, serialized + "\n");
    if (!as_json) {
      std::cout << "wrote " << plan.steps.size() << "-step plan for context "
                << target << " to " << out_path << "\n";
    } else {
      std::cout << serialized << "\n";
    }
  } else {
    std::cout << serialized << "\n";
  }
  return 0;
}

/// Applies plan steps 1..upto in order, returning the resulting model and
/// the journal (so rollback can restore the previous state).
sk::SystemModel apply_prefix(const sk::SystemModel& model,
                             const sk::MigrationPlan& plan, int upto,
                             sk::Journal& journal) {
  sk::SystemModel current = model;
  for (const auto& step : plan.steps) {
    if (step.id > upto) break;
    current = journal.apply(current, step);
  }
  return current;
}

int cmd_apply(const std::string& model_path, const std::string& plan_path,
              int step_id, const std::string& out_path) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::MigrationPlan plan = sk::load_plan(read_file(plan_path));
  int upto = step_id > 0 ? step_id
                         : (plan.steps.empty() ? 0 : plan.steps.back().id);
  sk::Journal journal;
  sk::SystemModel result = apply_prefix(model, plan, upto, journal);
  std::string serialized = sk::serialize(result);
  if (out_path.empty()) {
    std::cout << serialized << "\n";
  } else {
    write_file(out_path, serialized + "\n");
    std::cerr << "applied " << journal.size() << " step(s); wrote " << out_path
              << "\n";
  }
  return 0;
}

int cmd_rollback(const std::string& model_path, const std::string& plan_path,
                 int step_id, const std::string& out_path) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::MigrationPlan plan = sk::load_plan(read_file(plan_path));
  int upto = step_id > 0 ? step_id
                         : (plan.steps.empty() ? 0 : plan.steps.back().id);
  sk::Journal journal;
  sk::SystemModel applied = apply_prefix(model, plan, upto, journal);
  (void)applied;
  sk::SystemModel result = journal.rollback_last();
  std::string serialized = sk::serialize(result);
  if (out_path.empty()) {
    std::cout << serialized << "\n";
  } else {
    write_file(out_path, serialized + "\n");
    std::cerr << "rolled back step " << upto << "; wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& trace_path,
                 const std::string& plan_path, std::uint64_t seed,
                 int replicas, int corrupt_step, bool as_json) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::WorkloadTrace trace = sk::load_trace(read_file(trace_path));

  if (plan_path.empty()) {
    sk::ExecutionReport report =
        sk::execute_trace(model, trace, seed, replicas);
    if (as_json) {
      std::cout << sk::report_to_json(report) << "\n";
    } else {
      std::cout << "replayed " << report.responses.size() << " request(s)\n"
                << "  local_calls:              " << report.metrics.local_calls
                << "\n"
                << "  api_calls:                " << report.metrics.api_calls
                << "\n"
                << "  db_calls:                 " << report.metrics.db_calls
                << "\n"
                << "  cross_boundary_api_calls: "
                << report.metrics.cross_boundary_api_calls << "\n"
                << "  glue_calls:               " << report.metrics.glue_calls
                << "\n";
    }
    return 0;
  }

  sk::MigrationPlan plan = sk::load_plan(read_file(plan_path));
  sk::MigrationOptions opts;
  opts.corrupt_step_id = corrupt_step;
  sk::MigrationReport report = sk::run_migration(model, plan, trace, seed, opts);
  bool diverged = false;
  for (const auto& s : report.steps) {
    if (!s.equivalent) diverged = true;
  }
  if (as_json) {
    std::cout << sk::migration_report_to_json(report) << "\n";
  } else {
    for (const auto& s : report.steps) {
      std::cout << "step " << s.step.id << " (" << sk::step_kind_name(s.step.kind)
                << (s.step.context.empty() ? "" : " " + s.step.context)
                << (s.step.path.empty() ? "" : " " + s.step.path)
                << (s.step.kind == sk::StepKind::ShiftTraffic
                        ? " " + std::to_string(s.step.percent) + "%"
                        : "")
                << "): "
                << (s.equivalent ? "equivalent"
                                 : "DIVERGED at seq " +
                                       std::to_string(s.divergence->seq) +
                                       (s.rolled_back ? ", rolled back" : ""))
                << "\n";
    }
    std::cout << (report.completed ? "migration completed"
                                   : "migration halted")
              << "; isolation violations: " << report.final_isolation.size()
              << "\n";
  }
  return (diverged || !report.final_isolation.empty()) ? 1 : 0;
}

int cmd_db_sync_status(const std::string& model_path, bool as_json) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  if (as_json) {
    json j = json::array();
    for (const auto& [db, st] : model.sync_states) {
      j.push_back(json{{"target_db", st.target_db},
                       {"applied_seq", st.applied_seq},
                       {"mode", sk::sync_mode_name(st.mode)}});
    }
    std::cout << j.dump(2) << "\n";
  } else if (model.sync_states.empty()) {
    std::cout << "no replica databases\n";
  } else {
    for (const auto& [db, st] : model.sync_states) {
      std::cout << db << ": mode " << sk::sync_mode_name(st.mode)
                << ", applied_seq " << st.applied_seq << "\n";
    }
  }
  return 0;
}

int cmd_db_cutover(const std::string& model_path, const std::string& context,
                   const std::string& out_path) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  sk::SystemModel result = sk::cutover(model, context);
  std::string serialized = sk::serialize(result);
  if (out_path.empty()) {
    std::cout << serialized << "\n";
  } else {
    write_file(out_path, serialized + "\n");
    std::cerr << "cut over context " << context << "; wrote " << out_path
              << "\n";
  }
  return 0;
}

int cmd_db_verify(const std::string& model_path, bool as_json) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  std::vector<sk::Violation> violations = sk::verify_isolation(model);
  if (as_json) {
    json j = json::array();
    for (const auto& v : violations) {
      j.push_back(json{{"rule", v.rule}, {"subject", v.subject},
                       {"detail", v.detail}});
    }
    std::cout << j.dump(2) << "\n";
  } else if (violations.empty()) {
    std::cout << "fully isolated\n";
  } else {
    for (const auto& v : violations) {
      std::cout << v.rule << " (" << v.subject << "): " << v.detail << "\n";
    }
  }
  return violations.empty() ? 0 : 1;
}

std::atomic<sk::GatewayServer*> g_server{nullptr};

void handle_signal(int) {
  sk::GatewayServer* server = g_server.load();
  if (server != nullptr) server->stop();
}

int cmd_gateway_serve(const std::string& model_path, const std::string& listen,
                      bool require_auth) {
  sk::SystemModel model = sk::load_model(read_file(model_path));
  auto [host, port] = split_listen(listen);
  sk::GatewayServerOptions options;
  options.listen_host = host;
  options.listen_port = port;
  options.require_auth = require_auth;
  sk::GatewayServer server(sk::routes_from_model(model), std::move(options));
  g_server.store(&server);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cerr << "gateway listening on " << host << ":" << port << "\n";
  bool ok = server.serve();
  g_server.store(nullptr);
  if (!ok) {
    std::cerr << "failed to bind " << listen << "\n";
    return 1;
  }
  return 0;
}

int cmd_registry(const std::string& addr, const std::string& action,
                 const std::string& service, const std::string& instance,
                 const std::string& address) {
  auto [host, port] = split_listen(addr);
  httplib::Client client(host, port);
  client.set_connection_timeout(5);
  client.set_read_timeout(5);
  httplib::Result result;
  if (action == "register") {
    json body;
    body["instance_id"] = instance;
    body["address"] = address;
    result = client.Post("/registry/" + service + "/instances", body.dump(),
                         "application/json");
  } else if (action == "deregister") {
    result = client.Delete("/registry/" + service + "/instances/" + instance);
  } else if (action == "heartbeat") {
    result = client.Put("/registry/" + service + "/instances/" + instance +
                            "/heartbeat",
                        "", "application/json");
  } else {  // list
    result = client.Get("/registry/" + service);
  }
  if (!result) {
    std::cerr << "cannot reach gateway admin at " << addr << "\n";
    return 1;
  }
  std::cout << result->body << "\n";
  return result->status < 400 ? 0 : 1;
}

std::atomic<httplib::Server*> g_stub{nullptr};

void handle_stub_signal(int) {
  httplib::Server* server = g_stub.load();
  if (server != nullptr) server->stop();
}

/// Test double: a deterministic upstream that reports how many requests it
/// served. Responses depend only on (name, path) so a cached copy of a
/// response is indistinguishable from a fresh one.
int cmd_stub_upstream(const std::string& listen, const std::string& name) {
  auto [host, port] = split_listen(listen);
  httplib::Server server;
  std::atomic<std::uint64_t> served{0};

  server.Get("/__stats", [&](const httplib::Request&, httplib::Response& res) {
    json j;
    j["name"] = name;
    j["served"] = served.load();
    res.set_content(j.dump(), "application/json");
  });
  server.Get(".*", [&](const httplib::Request& req, httplib::Response& res) {
    served++;
    json j;
    j["server"] = name;
    j["path"] = req.path;
    res.set_content(j.dump(), "application/json");
  });

  g_stub.store(&server);
  std::signal(SIGINT, handle_stub_signal);
  std::signal(SIGTERM, handle_stub_signal);
  std::cerr << "stub upstream '" << name << "' listening on " << host << ":"
            << port << "\n";
  bool ok = server.listen(host, port);
  g_stub.store(nullptr);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stranglerkit: monolith-to-microservice migration toolkit"};
  app.require_subcommand(1);

  std::string model_path, trace_path, plan_path, out_path, target, context;
  std::string listen = "127.0.0.1:8080";
  std::string reg_addr, reg_action = "list", reg_service, reg_instance,
              reg_address;
  std::string stub_name = "stub";
  std::uint64_t seed = 0;
  bool as_json = false, unweighted = false, infer = false, require_auth = false;
  int threshold = 0, step_id = 0, replicas = 1, corrupt_step = 0;
  std::vector<int> shifts;

  auto* analyze = app.add_subcommand("analyze", "rank extraction candidates");
  analyze->add_option("--model", model_path, "model document")->required();
  analyze->add_flag("--json", as_json, "machine-readable output");
  analyze->add_flag("--unweighted", unweighted,
                    "count distinct edges instead of call volume");
  analyze->add_flag("--infer-contexts", infer,
                    "propose a context labeling (advisory)");
  analyze->add_option("--threshold", threshold,
                      "minimum edge weight for context inference");
  auto* analyze_seed = analyze->add_option("--seed", seed, "deterministic seed");

  auto* validate = app.add_subcommand("validate", "validate a model document");
  validate->add_option("--model", model_path, "model document")->required();
  validate->add_flag("--json", as_json, "machine-readable output");

  auto* plan = app.add_subcommand("plan", "generate a migration plan");
  plan->add_option("--model", model_path, "model document")->required();
  plan->add_option("--target", target, "context to extract")->required();
  plan->add_option("--shift", shifts,
                   "traffic shift schedule (default 10 50 100)");
  plan->add_option("-o,--out", out_path, "plan file to write");
  plan->add_flag("--json", as_json, "print the plan to stdout as JSON");

  auto* apply = app.add_subcommand("apply", "apply plan steps to a model");
  apply->add_option("--model", model_path, "model document")->required();
  apply->add_option("--plan", plan_path, "plan file")->required();
  apply->add_option("--step", step_id,
                    "apply steps 1..N (default: the whole plan)");
  apply->add_option("-o,--out", out_path, "model file to write");

  auto* rollback =
      app.add_subcommand("rollback", "apply steps 1..N, then roll back step N");
  rollback->add_option("--model", model_path, "model document")->required();
  rollback->add_option("--plan", plan_path, "plan file")->required();
  rollback->add_option("--step", step_id,
                       "step to roll back (default: last in plan)");
  rollback->add_option("-o,--out", out_path, "model file to write");

  auto* simulate = app.add_subcommand(
      "simulate", "replay a trace; with --plan, check each migration step");
  simulate->add_option("--model", model_path, "model document")->required();
  simulate->add_option("--trace", trace_path, "workload trace")->required();
  simulate->add_option("--plan", plan_path, "migration plan to step through");
  auto* sim_seed = simulate->add_option("--seed", seed, "deterministic seed");
  simulate->add_option("--replicas", replicas,
                       "horizontal-scaling baseline: identical copies behind "
                       "a balancer");
  simulate->add_option("--corrupt-step", corrupt_step,
                       "fault injection: sabotage the model after this step");
  simulate->add_flag("--json", as_json, "machine-readable output");

  auto* db = app.add_subcommand("db", "database decomposition");
  db->require_subcommand(1);
  auto* sync_status = db->add_subcommand("sync-status", "replica sync modes");
  sync_status->add_option("--model", model_path, "model document")->required();
  sync_status->add_flag("--json", as_json, "machine-readable output");
  auto* db_cutover = db->add_subcommand("cutover", "transfer table ownership");
  db_cutover->add_option("--model", model_path, "model document")->required();
  db_cutover->add_option("--context", context, "context to cut over")
      ->required();
  db_cutover->add_option("-o,--out", out_path, "model file to write");
  auto* db_verify = db->add_subcommand("verify", "cross-database isolation");
  db_verify->add_option("--model", model_path, "model document")->required();
  db_verify->add_flag("--json", as_json, "machine-readable output");

  auto* gateway = app.add_subcommand("gateway", "runtime edge");
  gateway->require_subcommand(1);
  auto* serve = gateway->add_subcommand("serve", "run the HTTP gateway");
  serve->add_option("--model", model_path, "model document (route table)")
      ->required();
  serve->add_option("--listen", listen, "host:port (default 127.0.0.1:8080)");
  serve->add_flag("--require-auth", require_auth,
                  "enable the reject-unauthenticated filter");

  auto* registry = app.add_subcommand("registry", "admin client");
  registry->add_option("--addr", reg_addr, "gateway admin host:port")
      ->required();
  registry
      ->add_option("--action", reg_action,
                   "one of register|deregister|heartbeat|list")
      ->check(CLI::IsMember({"register", "deregister", "heartbeat", "list"}));
  registry->add_option("--service", reg_service, "service id")->required();
  registry->add_option("--instance", reg_instance, "instance id");
  registry->add_option("--address", reg_address, "instance host:port");

  auto* stub = app.add_subcommand("stub-upstream",
                                  "deterministic upstream test double");
  stub->add_option("--listen", listen, "host:port")->required();
  stub->add_option("--name", stub_name, "server name echoed in responses");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return 2;
  }

  try {
    if (*analyze) {
      return cmd_analyze(model_path, as_json, unweighted, infer, threshold,
                         resolve_seed(analyze_seed->count() > 0, seed));
    }
    if (*validate) return cmd_validate(model_path, as_json);
    if (*plan) return cmd_plan(model_path, target, shifts, out_path, as_json);
    if (*apply) return cmd_apply(model_path, plan_path, step_id, out_path);
    if (*rollback) return cmd_rollback(model_path, plan_path, step_id, out_path);
    if (*simulate) {
      return cmd_simulate(model_path, trace_path, plan_path,
                          resolve_seed(sim_seed->count() > 0, seed), replicas,
                          corrupt_step, as_json);
    }
    if (*db) {
      if (*sync_status) return cmd_db_sync_status(model_path, as_json);
      if (*db_cutover) return cmd_db_cutover(model_path, context, out_path);
      if (*db_verify) return cmd_db_verify(model_path, as_json);
    }
    if (*gateway && *serve) {
      return cmd_gateway_serve(model_path, listen, require_auth);
    }
    if (*registry) {
      return cmd_registry(reg_addr, reg_action, reg_service, reg_instance,
                          reg_address);
    }
    if (*stub) return cmd_stub_upstream(listen, stub_name);
  } catch (const sk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == sk::ErrorCode::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include "stranglerkit/simulator.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "stranglerkit/hash.hpp"

namespace stranglerkit {

using nlohmann::json;

namespace {

/// Longest-prefix route match; returns the selected entry.
const RouteEntry& match_route(const SystemModel& model,
                              const std::string& path) {
  const RouteEntry* best = nullptr;
  for (const auto& r : model.routes) {
    if (path.rfind(r.path_prefix, 0) != 0) continue;  // not a prefix
    if (best == nullptr || r.path_prefix.size() > best->path_prefix.size()) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::NoRouteMatched, "no route matches " + path);
  }
  return *best;
}

/// Pre-order walk from the entry module, out-neighbors in ascending id
/// order, each module visited once.
std::vector<std::string> walk_modules(
    const std::map<std::string, std::vector<std::string>>& adjacency,
    const std::string& entry) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::vector<std::string> stack{entry};
  while (!stack.empty()) {
    std::string cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    order.push_back(cur);
    auto it = adjacency.find(cur);
    if (it == adjacency.end()) continue;
    // push in reverse so the smallest id is expanded first
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit) {
      if (seen.count(*rit) == 0) stack.push_back(*rit);
    }
  }
  return order;
}

bool replica_hosts(const SystemModel& model, const std::string& db_id,
                   const std::string& table) {
  const DatabaseRecord* db = model.find_database(db_id);
  if (db == nullptr) return false;
  auto it = db->tables.find(table);
  return it != db->tables.end() &&
         it->second.mode == AccessMode::ReadOnlyReplica;
}

const GlueRecord* glue_for_service(const SystemModel& model,
                                   const std::string& service_id) {
  for (const auto& g : model.glue) {
    if (g.service == service_id) return &g;
  }
  return nullptr;
}

json counters_to_json(const Counters& c) {
  return json{{"local_calls", c.local_calls},
              {"api_calls", c.api_calls},
              {"db_calls", c.db_calls},
              {"cross_boundary_api_calls", c.cross_boundary_api_calls},
              {"glue_calls", c.glue_calls}};
}

json deltas_to_json(const CounterDeltas& d) {
  return json{{"local_calls", d.local_calls},
              {"api_calls", d.api_calls},
              {"db_calls", d.db_calls},
              {"cross_boundary_api_calls", d.cross_boundary_api_calls},
              {"glue_calls", d.glue_calls}};
}

}  // namespace

CounterDeltas counter_deltas(const Counters& from, const Counters& to) {
  auto d = [](std::uint64_t a, std::uint64_t b) {
    return static_cast<std::int64_t>(b) - static_cast<std::int64_t>(a);
  };
  return CounterDeltas{d(from.local_calls, to.local_calls),
                       d(from.api_calls, to.api_calls),
                       d(from.db_calls, to.db_calls),
                       d(from.cross_boundary_api_calls,
                         to.cross_boundary_api_calls),
                       d(from.glue_calls, to.glue_calls)};
}

ExecutionReport execute_trace(const SystemModel& model,
                              const WorkloadTrace& trace, std::uint64_t seed,
                              int replicas) {
  if (replicas < 1) {
    throw Error(ErrorCode::ValidationError, "replicas must be >= 1");
  }
  for (const auto& r : trace) {
    if (model.endpoints.find(r.endpoint) == model.endpoints.end()) {
      throw Error(ErrorCode::UnboundEndpoint,
                  "trace endpoint " + r.endpoint + " not bound to a module");
    }
  }

  std::map<std::string, std::vector<std::string>> adjacency;
  for (const auto& e : model.edges) adjacency[e.from].push_back(e.to);
  for (auto& [from, tos] : adjacency) std::sort(tos.begin(), tos.end());

  ExecutionReport report;
  // Logical row state keyed by table name: content is host-independent, so
  // moving a table between databases cannot change what a request reads.
  std::map<std::string, std::map<std::string, std::string>> rows;

  for (const auto& r : trace) {
    // Gateway: the route decides which deployment copy serves the request.
    // The module flow and the data are the same on every copy, so the
    // decision (and the replica index under horizontal scaling) leaves no
    // trace in the response.
    const RouteEntry& route = match_route(model, r.endpoint);
    (void)route;
    (void)(r.seq % static_cast<std::uint64_t>(replicas));

    const std::string& entry = model.endpoints.at(r.endpoint);
    std::vector<std::string> visited = walk_modules(adjacency, entry);
    std::set<std::string> visited_set(visited.begin(), visited.end());

    // Every call made by a visited module happens once.
    for (const auto& e : model.edges) {
      if (visited_set.count(e.from) == 0) continue;
      if (e.kind == EdgeKind::Local) {
        report.metrics.local_calls++;
      } else {
        report.metrics.api_calls++;
        const ServiceRecord* sf = model.service_of_module(e.from);
        const ServiceRecord* st = model.service_of_module(e.to);
        if (sf != nullptr && st != nullptr && !sf->database.empty() &&
            !st->database.empty() && sf->database != st->database) {
          report.metrics.cross_boundary_api_calls++;
        }
      }
    }

    // Find the module that performs the data operation: the first visited
    // module holding either a direct access or a bridge to the table.
    std::string accessor;
    bool via_bridge = false;
    std::string bridge_via;
    for (const auto& mid : visited) {
      if (model.data_access.count({mid, r.table}) != 0) {
        accessor = mid;
        break;
      }
      bool found = false;
      for (const auto& b : model.data_bridges) {
        if (b.module == mid && b.table == r.table) {
          accessor = mid;
          via_bridge = true;
          bridge_via = b.via_service;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (accessor.empty()) {
      throw Error(ErrorCode::ValidationError,
                  "endpoint " + r.endpoint + " flow cannot reach table " +
                      r.table);
    }

    const DatabaseRecord* owner_db = model.owner_db_of_table(r.table);
    if (owner_db == nullptr) {
      throw Error(ErrorCode::ValidationError, "unowned table " + r.table);
    }
    const ServiceRecord* accessor_svc = model.service_of_module(accessor);
    const ServiceRecord* owner_svc = model.service_owning_db(owner_db->id);

    if (via_bridge) {
      // Cross-ownership access through the owning service's API: read the
      // local reference, one API hop, the owner touches its own database.
      report.metrics.db_calls += 1;
      report.metrics.api_calls += 1;
      report.metrics.cross_boundary_api_calls += 1;
      report.metrics.db_calls += 1;
      (void)bridge_via;
    } else if (accessor_svc != nullptr && owner_svc != nullptr &&
               accessor_svc->id == owner_svc->id) {
      report.metrics.db_calls += 1;  // own database
    } else {
      bool no_own_db = accessor_svc == nullptr || accessor_svc->database.empty();
      bool replica_window =
          accessor_svc != nullptr &&
          replica_hosts(model, accessor_svc->database, r.table);
      if (!no_own_db && !replica_window) {
        throw Error(ErrorCode::IsolationBreach,
                    "module " + accessor + " reaches " + r.table +
                        " owned by " + owner_db->id +
                        " without an API bridge");
      }
      const GlueRecord* glue =
          accessor_svc == nullptr ? nullptr
                                  : glue_for_service(model, accessor_svc->id);
      if (glue != nullptr) {
        report.metrics.glue_calls += 1;
        report.metrics.db_calls += 1;
      } else {
        report.metrics.db_calls += 1;  // shared-database phase
      }
    }

    // The data operation itself. Writes always land on the owning database;
    // content digests are a pure function of (table, key, seq, seed), so the
    // row state is independent of where the table lives.
    std::string row_digest;
    if (r.op == TraceOp::Write) {
      assert_writable(model, owner_db->id, r.table);
      DigestBuilder row(seed);
      row.add("row");
      row.add(r.table);
      row.add(r.row_key);
      row.add_u64(r.seq);
      row_digest = row.hex();
      auto& table_rows = rows[r.table];
      ChangeOp op = table_rows.count(r.row_key) == 0 ? ChangeOp::Insert
                                                     : ChangeOp::Update;
      table_rows[r.row_key] = row_digest;
      report.change_log.push_back(
          ChangeRecord{r.seq, r.table, r.row_key, op, row_digest});
    } else {
      auto tit = rows.find(r.table);
      if (tit != rows.end()) {
        auto rit = tit->second.find(r.row_key);
        if (rit != tit->second.end()) row_digest = rit->second;
      }
    }

    DigestBuilder resp(seed);
    resp.add("resp");
    resp.add_u64(r.seq);
    resp.add(r.endpoint);
    resp.add(r.key);
    for (const auto& mid : visited) resp.add(mid);
    resp.add(r.op == TraceOp::Write ? "write" : "read");
    resp.add(r.table);
    resp.add(r.row_key);
    resp.add(row_digest.empty() ? "absent" : row_digest);
    report.responses.push_back(ResponseRecord{r.seq, accessor, resp.hex()});
  }
  return report;
}

std::optional<Divergence> equivalence_check(const ExecutionReport& a,
                                            const ExecutionReport& b) {
  if (a.responses.size() != b.responses.size()) {
    throw Error(ErrorCode::TraceMismatch,
                "reports cover " + std::to_string(a.responses.size()) +
                    " vs " + std::to_string(b.responses.size()) + " requests");
  }
  for (std::size_t i = 0; i < a.responses.size(); ++i) {
    if (a.responses[i].seq != b.responses[i].seq) {
      throw Error(ErrorCode::TraceMismatch,
                  "reports disagree on request sequence at position " +
                      std::to_string(i));
    }
    if (a.responses[i].digest != b.responses[i].digest) {
      return Divergence{a.responses[i].seq, a.responses[i].digest,
                        b.responses[i].digest};
    }
  }
  return std::nullopt;
}

MigrationReport run_migration(const SystemModel& model,
                              const MigrationPlan& plan,
                              const WorkloadTrace& trace, std::uint64_t seed,
                              const MigrationOptions& opts) {
  MigrationReport out;
  out.baseline = execute_trace(model, trace, seed);

  SystemModel current = model;
  Journal journal;
  for (const auto& step : plan.steps) {
    ApplyContext ctx;
    ctx.source_log = &out.baseline.change_log;
    current = journal.apply(current, step, ctx);

    if (step.kind == StepKind::StartSync) {
      // Drive the row-level sync machinery over the captured change log and
      // cross-check it against the projection — an internal consistency
      // guard on the replication path.
      std::string db_id = replica_db_id_for_context(step.context);
      RowStore replica = make_replica_store(current, db_id);
      SyncState st{db_id, 0, SyncMode::Syncing};
      auto [synced, final_state] =
          sync_until_quiescent(out.baseline.change_log, replica, st);
      std::set<std::string> replica_tables;
      for (const auto& [t, m] : replica.tables) replica_tables.insert(t);
      if (synced != project_log(out.baseline.change_log, replica_tables) ||
          final_state.mode != SyncMode::Converged) {
        throw Error(ErrorCode::ValidationError,
                    "sync machinery diverged from the log projection");
      }
    }

    if (opts.corrupt_step_id == step.id && !current.endpoints.empty()) {
      // Sabotage: rebind the first endpoint to a different module.
      auto ep = current.endpoints.begin();
      for (const auto& m : current.modules) {
        if (m.id != ep->second) {
          ep->second = m.id;
          break;
        }
      }
    }

    ExecutionReport after = execute_trace(current, trace, seed);
    StepReport sr;
    sr.step = step;
    sr.metrics = after.metrics;
    sr.deltas = counter_deltas(out.baseline.metrics, after.metrics);
    sr.divergence = equivalence_check(out.baseline, after);
    sr.equivalent = !sr.divergence.has_value();
    if (!sr.equivalent) {
      current = journal.rollback(step);
      sr.rolled_back = true;
      out.steps.push_back(std::move(sr));
      out.completed = false;
      out.final_isolation = verify_isolation(current);
      out.final_model = std::move(current);
      return out;
    }
    out.steps.push_back(std::move(sr));
  }
  out.completed = true;
  out.final_isolation = verify_isolation(current);
  out.final_model = std::move(current);
  return out;
}

std::string report_to_json(const ExecutionReport& report) {
  json doc;
  doc["metrics"] = counters_to_json(report.metrics);
  doc["responses"] = json::array();
  for (const auto& r : report.responses) {
    doc["responses"].push_back(
        json{{"seq", r.seq}, {"module", r.module}, {"digest", r.digest}});
  }
  doc["change_log"] = json::array();
  for (const auto& c : report.change_log) {
    doc["change_log"].push_back(json{{"seq", c.seq},
                                     {"table", c.table},
                                     {"row_key", c.row_key},
                                     {"op", change_op_name(c.op)},
                                     {"row_digest", c.row_digest}});
  }
  return doc.dump(2);
}

std::string migration_report_to_json(const MigrationReport& report) {
  json doc;
  doc["baseline"] = json{{"metrics", counters_to_json(report.baseline.metrics)}};
  doc["steps"] = json::array();
  for (const auto& s : report.steps) {
    json js;
    js["id"] = s.step.id;
    js["kind"] = step_kind_name(s.step.kind);
    if (!s.step.context.empty()) js["context"] = s.step.context;
    if (!s.step.path.empty()) js["path"] = s.step.path;
    if (s.step.kind == StepKind::ShiftTraffic) js["percent"] = s.step.percent;
    js["equivalent"] = s.equivalent;
    js["rolled_back"] = s.rolled_back;
    js["metrics"] = counters_to_json(s.metrics);
    js["deltas"] = deltas_to_json(s.deltas);
    if (s.divergence.has_value()) {
      js["divergence"] = json{{"seq", s.divergence->seq},
                              {"baseline_digest", s.divergence->digest_a},
                              {"step_digest", s.divergence->digest_b}};
    }
    doc["steps"].push_back(js);
  }
  doc["completed"] = report.completed;
  doc["final_isolation"] = json::array();
  for (const auto& v : report.final_isolation) {
    doc["final_isolation"].push_back(
        json{{"rule", v.rule}, {"subject", v.subject}, {"detail", v.detail}});
  }
  return doc.dump(2);
}

}  // namespace stranglerkit

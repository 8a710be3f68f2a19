#include "stranglerkit/planner.hpp"

#include <algorithm>

#include "json.hpp"

namespace stranglerkit {

using nlohmann::json;

namespace {

constexpr const char* kFrontendServiceId = "frontend";

void require_frozen(const SystemModel& model) {
  if (!model.frozen) {
    throw Error(ErrorCode::PreconditionFailed, "monolith not frozen");
  }
}

const ServiceRecord& require_monolith(const SystemModel& model) {
  const ServiceRecord* m = model.monolith();
  if (m == nullptr) {
    throw Error(ErrorCode::PreconditionFailed, "model has no monolith service");
  }
  return *m;
}

/// After moving modules between services, every edge's kind must agree with
/// the membership: calls within a service are local, calls across services
/// go over APIs.
void normalize_edge_kinds(SystemModel& model) {
  for (auto& e : model.edges) {
    const ServiceRecord* sf = model.service_of_module(e.from);
    const ServiceRecord* st = model.service_of_module(e.to);
    if (sf == nullptr || st == nullptr) continue;
    e.kind = (sf->id == st->id) ? EdgeKind::Local : EdgeKind::Api;
  }
}

const ServiceRecord* extracted_service_of(const SystemModel& model,
                                          const std::string& context) {
  return model.find_service(service_id_for_context(context));
}

SystemModel apply_freeze(const SystemModel& model) {
  SystemModel out = model;
  out.frozen = true;
  return out;
}

SystemModel apply_split_frontend(const SystemModel& model) {
  require_frozen(model);
  const ServiceRecord& mono = require_monolith(model);
  if (model.find_service(kFrontendServiceId) != nullptr) return model;

  std::vector<std::string> moved;
  for (const auto& mid : mono.modules) {
    const ModuleNode* m = model.find_module(mid);
    if (m != nullptr && m->layer == Layer::UserInterface) moved.push_back(mid);
  }
  if (moved.empty()) return model;

  SystemModel out = model;
  for (auto& s : out.services) {
    if (s.id != mono.id) continue;
    s.modules.erase(std::remove_if(s.modules.begin(), s.modules.end(),
                                   [&moved](const std::string& id) {
                                     return std::find(moved.begin(),
                                                      moved.end(),
                                                      id) != moved.end();
                                   }),
                    s.modules.end());
  }
  ServiceRecord frontend;
  frontend.id = kFrontendServiceId;
  frontend.kind = ServiceKind::Frontend;
  frontend.modules = std::move(moved);
  out.services.push_back(std::move(frontend));
  normalize_edge_kinds(out);
  return out;
}

SystemModel apply_extract(const SystemModel& model, const std::string& context) {
  require_frozen(model);
  if (!model.has_context(context)) {
    throw Error(ErrorCode::UnknownContext, "no such context: " + context);
  }
  for (const auto& s : model.services) {
    if (s.kind != ServiceKind::Extracted) continue;
    for (const auto& mid : s.modules) {
      const ModuleNode* m = model.find_module(mid);
      if (m != nullptr && m->context == context) {
        throw Error(ErrorCode::AlreadyExtracted,
                    "context " + context + " already owns service " + s.id);
      }
    }
  }
  if (model.find_service(service_id_for_context(context)) != nullptr) {
    throw Error(ErrorCode::AlreadyExtracted,
                "service " + service_id_for_context(context) + " already exists");
  }
  const ServiceRecord& mono = require_monolith(model);

  std::vector<std::string> moved;
  for (const auto& mid : mono.modules) {
    const ModuleNode* m = model.find_module(mid);
    if (m != nullptr && m->context == context) moved.push_back(mid);
  }

  SystemModel out = model;
  for (auto& s : out.services) {
    if (s.id != mono.id) continue;
    s.modules.erase(std::remove_if(s.modules.begin(), s.modules.end(),
                                   [&moved](const std::string& id) {
                                     return std::find(moved.begin(),
                                                      moved.end(),
                                                      id) != moved.end();
                                   }),
                    s.modules.end());
  }
  ServiceRecord svc;
  svc.id = service_id_for_context(context);
  svc.kind = ServiceKind::Extracted;
  svc.modules = std::move(moved);
  out.services.push_back(std::move(svc));
  normalize_edge_kinds(out);
  return out;
}

SystemModel apply_add_glue(const SystemModel& model, const std::string& context) {
  if (!model.has_context(context)) {
    throw Error(ErrorCode::UnknownContext, "no such context: " + context);
  }
  for (const auto& g : model.glue) {
    if (g.context == context) return model;  // already glued
  }
  const ServiceRecord* svc = extracted_service_of(model, context);
  if (svc == nullptr) {
    throw Error(ErrorCode::PreconditionFailed,
                "context " + context + " not extracted yet");
  }
  const ServiceRecord& mono = require_monolith(model);

  std::set<std::string> related = related_tables(model, context);
  // The monolith-side adapter attaches to the first monolith module (by id)
  // still touching the context's tables, or the monolith's first module.
  std::string mono_side;
  for (const auto& [mid, table] : model.data_access) {
    if (related.count(table) == 0) continue;
    const ServiceRecord* s = model.service_of_module(mid);
    if (s == nullptr || s->id != mono.id) continue;
    if (mono_side.empty() || mid < mono_side) mono_side = mid;
  }
  if (mono_side.empty()) {
    mono_side = mono.modules.empty() ? mono.id : mono.modules.front();
  }
  std::string svc_side = svc->modules.empty() ? svc->id : svc->modules.front();

  GlueRecord g;
  g.context = context;
  g.service = svc->id;
  g.monolith = mono.id;
  g.read_edge = GlueAdapterEdge{svc_side, mono_side};
  g.write_edge = GlueAdapterEdge{svc_side, mono_side};
  for (const auto& t : related) {
    const TableDef* def = model.find_table(t);
    if (def == nullptr) continue;
    for (const auto& col : def->columns) {
      g.field_map[t + "." + col] = col;
    }
  }

  SystemModel out = model;
  out.glue.push_back(std::move(g));
  return out;
}

SystemModel apply_add_route(const SystemModel& model, const std::string& context,
                            const std::string& path) {
  const ServiceRecord* svc = extracted_service_of(model, context);
  if (svc == nullptr) {
    throw Error(ErrorCode::PreconditionFailed,
                "context " + context + " not extracted yet");
  }
  const ServiceRecord& mono = require_monolith(model);
  for (const auto& r : model.routes) {
    if (r.path_prefix != path) continue;
    if (r.extracted_target == svc->id) return model;  // already routed
    throw Error(ErrorCode::PreconditionFailed,
                "route prefix " + path + " already bound to another target");
  }
  SystemModel out = model;
  out.routes.push_back(RouteEntry{path, mono.id, svc->id, 0});
  return out;
}

SystemModel apply_mirror(const SystemModel& model, const std::string& context) {
  return mirror_schema(hoist_constraints(model, context), context);
}

SystemModel apply_start_sync(const SystemModel& model,
                             const std::string& context,
                             const ApplyContext& ctx) {
  const ServiceRecord* svc = extracted_service_of(model, context);
  std::string db_id = replica_db_id_for_context(context);
  if (svc == nullptr || svc->database != db_id ||
      model.sync_states.find(db_id) == model.sync_states.end()) {
    throw Error(ErrorCode::PreconditionFailed,
                "tables not mirrored for context " + context);
  }
  const SyncState& st = model.sync_states.at(db_id);
  if (st.mode == SyncMode::Converged) return model;  // already synced
  if (st.mode == SyncMode::Cutover) {
    throw Error(ErrorCode::WrongMode, "replica already cut over");
  }

  SystemModel out = model;
  SyncState& state = out.sync_states[db_id];
  state.mode = SyncMode::Syncing;
  if (ctx.source_log != nullptr) {
    const DatabaseRecord* replica = out.find_database(db_id);
    for (const auto& change : *ctx.source_log) {
      if (replica->tables.find(change.table) == replica->tables.end()) continue;
      state.applied_seq = std::max(state.applied_seq, change.seq);
    }
  }
  state.mode = SyncMode::Converged;
  return out;
}

SystemModel apply_shift(const SystemModel& model, const std::string& path,
                        int percent) {
  if (percent < 0 || percent > 100) {
    throw Error(ErrorCode::InvalidPercent,
                "shift percent " + std::to_string(percent) + " outside [0,100]");
  }
  SystemModel out = model;
  for (auto& r : out.routes) {
    if (r.path_prefix != path) continue;
    if (percent > 0 && r.extracted_target.empty()) {
      throw Error(ErrorCode::InvalidPercent,
                  "route " + path + " has no extracted target");
    }
    r.shift_percent = percent;
    return out;
  }
  throw Error(ErrorCode::UnknownRoute, "no route with prefix " + path);
}

SystemModel apply_remove_glue(const SystemModel& model,
                              const std::string& context) {
  SystemModel out = model;
  out.glue.erase(std::remove_if(out.glue.begin(), out.glue.end(),
                                [&context](const GlueRecord& g) {
                                  return g.context == context;
                                }),
                 out.glue.end());
  return out;
}

}  // namespace

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::FreezeMonolith: return "freeze-monolith";
    case StepKind::SplitFrontend: return "split-frontend";
    case StepKind::ExtractService: return "extract-service";
    case StepKind::AddGlueCode: return "add-glue-code";
    case StepKind::AddGatewayRoute: return "add-gateway-route";
    case StepKind::MirrorTables: return "mirror-tables";
    case StepKind::StartSync: return "start-sync";
    case StepKind::Cutover: return "cutover";
    case StepKind::ShiftTraffic: return "shift-traffic";
    case StepKind::RemoveGlue: return "remove-glue";
  }
  return "freeze-monolith";
}

StepKind step_kind_from_name(const std::string& name) {
  if (name == "freeze-monolith") return StepKind::FreezeMonolith;
  if (name == "split-frontend") return StepKind::SplitFrontend;
  if (name == "extract-service") return StepKind::ExtractService;
  if (name == "add-glue-code") return StepKind::AddGlueCode;
  if (name == "add-gateway-route") return StepKind::AddGatewayRoute;
  if (name == "mirror-tables") return StepKind::MirrorTables;
  if (name == "start-sync") return StepKind::StartSync;
  if (name == "cutover") return StepKind::Cutover;
  if (name == "shift-traffic") return StepKind::ShiftTraffic;
  if (name == "remove-glue") return StepKind::RemoveGlue;
  throw Error(ErrorCode::UnknownStep, "unrecognized step kind: " + name);
}

MigrationPlan generate_plan(const SystemModel& model, const std::string& target,
                            const std::vector<int>& shifts) {
  if (!model.has_context(target)) {
    throw Error(ErrorCode::UnknownContext, "no such context: " + target);
  }
  for (const auto& s : model.services) {
    if (s.kind != ServiceKind::Extracted) continue;
    for (const auto& mid : s.modules) {
      const ModuleNode* m = model.find_module(mid);
      if (m != nullptr && m->context == target) {
        throw Error(ErrorCode::AlreadyExtracted,
                    "context " + target + " already owns service " + s.id);
      }
    }
  }

  std::vector<int> schedule = shifts.empty() ? std::vector<int>{100} : shifts;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 0 || schedule[i] > 100 ||
        (i > 0 && schedule[i] < schedule[i - 1])) {
      throw Error(ErrorCode::InvalidPercent,
                  "shift schedule must be non-decreasing within [0,100]");
    }
  }
  if (schedule.back() != 100) schedule.push_back(100);

  bool has_tables = !related_tables(model, target).empty();

  // Route prefix: the smallest endpoint path bound to a module of the target.
  std::string route_path;
  for (const auto& [path, mid] : model.endpoints) {
    const ModuleNode* m = model.find_module(mid);
    if (m == nullptr || m->context != target) continue;
    if (route_path.empty() || path < route_path) route_path = path;
  }

  MigrationPlan plan;
  plan.target = target;
  int id = 0;
  auto push = [&plan, &id](StepKind kind, std::string context,
                           std::string path = "", int percent = 0) {
    plan.steps.push_back(
        MigrationStep{++id, kind, std::move(context), std::move(path), percent});
  };

  push(StepKind::FreezeMonolith, "");
  push(StepKind::SplitFrontend, "");
  push(StepKind::ExtractService, target);
  push(StepKind::AddGlueCode, target);
  if (!route_path.empty()) {
    push(StepKind::AddGatewayRoute, target, route_path);
  }
  if (has_tables) {
    push(StepKind::MirrorTables, target);
    push(StepKind::StartSync, target);
    push(StepKind::Cutover, target);
  }
  if (!route_path.empty()) {
    for (int p : schedule) push(StepKind::ShiftTraffic, "", route_path, p);
  }
  push(StepKind::RemoveGlue, target);
  return plan;
}

SystemModel apply_step(const SystemModel& model, const MigrationStep& step,
                       const ApplyContext& ctx) {
  switch (step.kind) {
    case StepKind::FreezeMonolith: return apply_freeze(model);
    case StepKind::SplitFrontend: return apply_split_frontend(model);
    case StepKind::ExtractService: return apply_extract(model, step.context);
    case StepKind::AddGlueCode: return apply_add_glue(model, step.context);
    case StepKind::AddGatewayRoute:
      return apply_add_route(model, step.context, step.path);
    case StepKind::MirrorTables: return apply_mirror(model, step.context);
    case StepKind::StartSync: return apply_start_sync(model, step.context, ctx);
    case StepKind::Cutover: return cutover(model, step.context);
    case StepKind::ShiftTraffic: return apply_shift(model, step.path, step.percent);
    case StepKind::RemoveGlue: return apply_remove_glue(model, step.context);
  }
  throw Error(ErrorCode::UnknownStep, "unrecognized step kind");
}

SystemModel Journal::apply(const SystemModel& model, const MigrationStep& step,
                           const ApplyContext& ctx) {
  SystemModel result = apply_step(model, step, ctx);
  entries_.push_back(Entry{step, model});
  return result;
}

SystemModel Journal::rollback(const MigrationStep& step) {
  if (entries_.empty()) {
    throw Error(ErrorCode::NothingToRollback, "journal is empty");
  }
  if (!(entries_.back().step == step)) {
    throw Error(ErrorCode::NotLastApplied,
                std::string("step ") + std::to_string(step.id) + " (" +
                    step_kind_name(step.kind) +
                    ") is not the most recently applied step");
  }
  SystemModel pre = std::move(entries_.back().pre);
  entries_.pop_back();
  return pre;
}

SystemModel Journal::rollback_last() {
  if (entries_.empty()) {
    throw Error(ErrorCode::NothingToRollback, "journal is empty");
  }
  SystemModel pre = std::move(entries_.back().pre);
  entries_.pop_back();
  return pre;
}

const MigrationStep* Journal::last_step() const {
  return entries_.empty() ? nullptr : &entries_.back().step;
}

SystemModel rollback_step(Journal& journal, const MigrationStep& step) {
  return journal.rollback(step);
}

MigrationPlan load_plan(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  MigrationPlan plan;
  try {
    plan.target = doc.value("target", std::string{});
    for (const auto& js : doc.at("steps")) {
      MigrationStep step;
      step.id = js.at("id").get<int>();
      step.kind = step_kind_from_name(js.at("kind").get<std::string>());
      json params = js.value("params", json::object());
      step.context = params.value("context", std::string{});
      step.path = params.value("path", std::string{});
      step.percent = params.value("percent", 0);
      plan.steps.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return plan;
}

std::string serialize_plan(const MigrationPlan& plan) {
  json doc;
  doc["target"] = plan.target;
  doc["steps"] = json::array();
  for (const auto& step : plan.steps) {
    json params = json::object();
    if (!step.context.empty()) params["context"] = step.context;
    if (!step.path.empty()) params["path"] = step.path;
    if (step.kind == StepKind::ShiftTraffic) params["percent"] = step.percent;
    doc["steps"].push_back(
        json{{"id", step.id}, {"kind", step_kind_name(step.kind)}, {"params", params}});
  }
  return doc.dump(2);
}

}  // namespace stranglerkit

#include "stranglerkit/model.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace stranglerkit {

using nlohmann::json;

namespace {

Layer layer_from_string(const std::string& s) {
  if (s == "user-interface") return Layer::UserInterface;
  if (s == "business-logic") return Layer::BusinessLogic;
  if (s == "data-access") return Layer::DataAccess;
  throw Error(ErrorCode::ValidationError, "invalid layer: " + s);
}

EdgeKind edge_kind_from_string(const std::string& s) {
  if (s == "local") return EdgeKind::Local;
  if (s == "api") return EdgeKind::Api;
  throw Error(ErrorCode::ValidationError, "invalid edge kind: " + s);
}

Enforcement enforcement_from_string(const std::string& s) {
  if (s == "database-layer") return Enforcement::DatabaseLayer;
  if (s == "business-logic-layer") return Enforcement::BusinessLogicLayer;
  throw Error(ErrorCode::ValidationError, "invalid enforcement: " + s);
}

AccessMode access_mode_from_string(const std::string& s) {
  if (s == "read-write") return AccessMode::ReadWrite;
  if (s == "read-only-replica") return AccessMode::ReadOnlyReplica;
  throw Error(ErrorCode::ValidationError, "invalid access mode: " + s);
}

SyncMode sync_mode_from_string(const std::string& s) {
  if (s == "mirrored") return SyncMode::Mirrored;
  if (s == "syncing") return SyncMode::Syncing;
  if (s == "converged") return SyncMode::Converged;
  if (s == "cutover") return SyncMode::Cutover;
  throw Error(ErrorCode::ValidationError, "invalid sync mode: " + s);
}

ServiceKind service_kind_from_string(const std::string& s) {
  if (s == "monolith") return ServiceKind::Monolith;
  if (s == "frontend") return ServiceKind::Frontend;
  if (s == "extracted") return ServiceKind::Extracted;
  throw Error(ErrorCode::ValidationError, "invalid service kind: " + s);
}

const char* edge_kind_name(EdgeKind k) {
  return k == EdgeKind::Local ? "local" : "api";
}

const char* enforcement_name(Enforcement e) {
  return e == Enforcement::DatabaseLayer ? "database-layer"
                                         : "business-logic-layer";
}

const char* access_mode_name(AccessMode m) {
  return m == AccessMode::ReadWrite ? "read-write" : "read-only-replica";
}

const char* service_kind_name(ServiceKind k) {
  switch (k) {
    case ServiceKind::Monolith: return "monolith";
    case ServiceKind::Frontend: return "frontend";
    case ServiceKind::Extracted: return "extracted";
  }
  return "extracted";
}

std::string require_string(const json& j, const char* key,
                           const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::ParseError,
                where + ": missing or non-string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

const char* layer_name(Layer layer) {
  switch (layer) {
    case Layer::UserInterface: return "user-interface";
    case Layer::BusinessLogic: return "business-logic";
    case Layer::DataAccess: return "data-access";
  }
  return "business-logic";
}

const char* sync_mode_name(SyncMode mode) {
  switch (mode) {
    case SyncMode::Mirrored: return "mirrored";
    case SyncMode::Syncing: return "syncing";
    case SyncMode::Converged: return "converged";
    case SyncMode::Cutover: return "cutover";
  }
  return "mirrored";
}

const ServiceRecord* SystemModel::find_service(const std::string& id) const {
  for (const auto& s : services) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const ServiceRecord* SystemModel::monolith() const {
  for (const auto& s : services) {
    if (s.kind == ServiceKind::Monolith) return &s;
  }
  return nullptr;
}

const ServiceRecord* SystemModel::service_of_module(
    const std::string& module_id) const {
  for (const auto& s : services) {
    if (std::find(s.modules.begin(), s.modules.end(), module_id) !=
        s.modules.end()) {
      return &s;
    }
  }
  return nullptr;
}

const ModuleNode* SystemModel::find_module(const std::string& id) const {
  for (const auto& m : modules) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

const DatabaseRecord* SystemModel::find_database(const std::string& id) const {
  for (const auto& d : databases) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const DatabaseRecord* SystemModel::owner_db_of_table(
    const std::string& table) const {
  for (const auto& d : databases) {
    auto it = d.tables.find(table);
    if (it != d.tables.end() && it->second.mode == AccessMode::ReadWrite) {
      return &d;
    }
  }
  return nullptr;
}

const ServiceRecord* SystemModel::service_owning_db(
    const std::string& db_id) const {
  for (const auto& s : services) {
    if (s.database == db_id) return &s;
  }
  return nullptr;
}

const TableDef* SystemModel::find_table(const std::string& name) const {
  const DatabaseRecord* owner = owner_db_of_table(name);
  if (owner == nullptr) return nullptr;
  return &owner->tables.at(name).def;
}

std::set<std::string> SystemModel::contexts() const {
  std::set<std::string> out;
  for (const auto& m : modules) out.insert(m.context);
  return out;
}

bool SystemModel::has_context(const std::string& context) const {
  for (const auto& m : modules) {
    if (m.context == context) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<Violation> validate_structure(const SystemModel& model) {
  std::vector<Violation> out;
  auto flag = [&out](const std::string& rule, const std::string& subject,
                     const std::string& detail) {
    out.push_back(Violation{rule, subject, detail});
  };

  std::unordered_set<std::string> module_ids;
  for (const auto& m : model.modules) {
    if (!module_ids.insert(m.id).second) {
      flag("duplicate module id", m.id, "module id declared twice");
    }
  }

  // Module-to-service membership: exactly one service per module.
  std::unordered_map<std::string, int> membership;
  for (const auto& s : model.services) {
    for (const auto& mid : s.modules) {
      membership[mid]++;
      if (module_ids.find(mid) == module_ids.end()) {
        flag("unknown reference", s.id, "service lists unknown module " + mid);
      }
    }
  }
  for (const auto& m : model.modules) {
    auto it = membership.find(m.id);
    int count = it == membership.end() ? 0 : it->second;
    if (count == 0) flag("module in no service", m.id, "unassigned module");
    if (count > 1) flag("module in two services", m.id, "assigned twice");
  }

  // Databases: table ownership and replica shape.
  std::unordered_map<std::string, std::string> owner_of;  // table -> db
  std::map<std::string, int> replica_count;
  std::unordered_set<std::string> db_ids;
  for (const auto& d : model.databases) {
    if (!db_ids.insert(d.id).second) {
      flag("duplicate database id", d.id, "database id declared twice");
    }
    for (const auto& [name, hosting] : d.tables) {
      const TableDef& t = hosting.def;
      std::unordered_set<std::string> cols(t.columns.begin(), t.columns.end());
      if (cols.size() != t.columns.size()) {
        flag("duplicate column", name, "column names not unique");
      }
      if (cols.find(t.primary_key) == cols.end()) {
        flag("primary key not a column", name,
             "primary_key " + t.primary_key + " missing from columns");
      }
      if (hosting.mode == AccessMode::ReadWrite) {
        auto [it, inserted] = owner_of.emplace(name, d.id);
        if (!inserted) {
          flag("table in two databases", name,
               "read-write in " + it->second + " and " + d.id);
        }
      } else {
        replica_count[name]++;
      }
    }
  }
  for (const auto& d : model.databases) {
    for (const auto& [name, hosting] : d.tables) {
      if (hosting.mode != AccessMode::ReadOnlyReplica) continue;
      auto it = owner_of.find(name);
      if (it == owner_of.end()) {
        flag("replica of missing table", name, "no read-write owner");
        continue;
      }
      const DatabaseRecord* owner = nullptr;
      for (const auto& od : model.databases) {
        if (od.id == it->second) owner = &od;
      }
      const TableDef& src = owner->tables.at(name).def;
      if (!(src.columns == hosting.def.columns &&
            src.primary_key == hosting.def.primary_key)) {
        flag("replica mismatch", name,
             "replica structure differs from owner copy in " + it->second);
      }
    }
  }
  for (const auto& [name, count] : replica_count) {
    if (count > 1) flag("table replicated twice", name, "more than one replica");
  }

  // Service <-> database assignment: every database owned by exactly one
  // service; a service may own at most one database.
  std::unordered_map<std::string, int> db_owners;
  int monolith_count = 0;
  for (const auto& s : model.services) {
    if (s.kind == ServiceKind::Monolith) monolith_count++;
    if (s.database.empty()) continue;
    if (db_ids.find(s.database) == db_ids.end()) {
      flag("unknown reference", s.id, "service owns unknown database " + s.database);
    } else {
      db_owners[s.database]++;
    }
  }
  for (const auto& d : model.databases) {
    auto it = db_owners.find(d.id);
    int count = it == db_owners.end() ? 0 : it->second;
    if (count == 0) flag("database unowned", d.id, "no owning service");
    if (count > 1) flag("database in two services", d.id, "owned twice");
  }
  if (monolith_count > 1) {
    flag("multiple monoliths", "services", "more than one monolith service");
  }

  // Edges.
  for (const auto& e : model.edges) {
    std::string subject = e.from + "->" + e.to;
    if (e.from == e.to) flag("self edge", subject, "from equals to");
    if (e.weight <= 0) flag("nonpositive edge weight", subject, "weight must be >= 1");
    const ServiceRecord* sf = model.service_of_module(e.from);
    const ServiceRecord* st = model.service_of_module(e.to);
    if (module_ids.find(e.from) == module_ids.end() ||
        module_ids.find(e.to) == module_ids.end()) {
      flag("unknown reference", subject, "edge endpoint not a module");
      continue;
    }
    if (e.kind == EdgeKind::Api && sf != nullptr && st != nullptr && sf == st) {
      flag("api edge within service", subject,
           "api edges require endpoints in different services");
    }
  }

  // Foreign keys.
  for (const auto& fk : model.foreign_keys) {
    std::string subject = fk.from_table + "." + fk.from_column + "->" + fk.to_table;
    const TableDef* from = model.find_table(fk.from_table);
    const TableDef* to = model.find_table(fk.to_table);
    if (from == nullptr || to == nullptr) {
      flag("unknown reference", subject, "foreign key endpoint table missing");
      continue;
    }
    if (std::find(from->columns.begin(), from->columns.end(), fk.from_column) ==
        from->columns.end()) {
      flag("foreign key column missing", subject,
           fk.from_column + " not a column of " + fk.from_table);
    }
  }

  // Data access and endpoints resolve.
  for (const auto& [mid, table] : model.data_access) {
    if (module_ids.find(mid) == module_ids.end()) {
      flag("unknown reference", mid, "data_access module missing");
    }
    if (model.owner_db_of_table(table) == nullptr) {
      flag("unknown reference", table, "data_access table missing");
    }
  }
  for (const auto& [path, mid] : model.endpoints) {
    if (module_ids.find(mid) == module_ids.end()) {
      flag("endpoint module missing", path, "bound to unknown module " + mid);
    }
  }

  // Routes.
  std::unordered_set<std::string> prefixes;
  for (const auto& r : model.routes) {
    if (!prefixes.insert(r.path_prefix).second) {
      flag("duplicate route prefix", r.path_prefix, "prefix not unique");
    }
    if (r.shift_percent < 0 || r.shift_percent > 100) {
      flag("invalid shift percent", r.path_prefix, "outside [0,100]");
    }
    if (r.shift_percent > 0 && r.extracted_target.empty()) {
      flag("shift without extracted target", r.path_prefix,
           "positive shift requires an extracted target");
    }
    if (model.find_service(r.legacy_target) == nullptr) {
      flag("unknown reference", r.path_prefix, "legacy target missing");
    }
    if (!r.extracted_target.empty() &&
        model.find_service(r.extracted_target) == nullptr) {
      flag("unknown reference", r.path_prefix, "extracted target missing");
    }
  }

  // Glue, bridges, sync states resolve.
  for (const auto& g : model.glue) {
    if (model.find_service(g.service) == nullptr ||
        model.find_service(g.monolith) == nullptr) {
      flag("unknown reference", g.context, "glue service missing");
    }
  }
  for (const auto& b : model.data_bridges) {
    if (module_ids.find(b.module) == module_ids.end() ||
        model.owner_db_of_table(b.table) == nullptr ||
        model.find_service(b.via_service) == nullptr) {
      flag("unknown reference", b.module + "->" + b.table,
           "data bridge endpoint missing");
    }
  }
  for (const auto& [db, st] : model.sync_states) {
    if (model.find_database(db) == nullptr || st.target_db != db) {
      flag("unknown reference", db, "sync state without database");
    }
  }

  return out;
}

// Isolation scan shared with dbsplit::verify_isolation. A data access crosses
// the ownership boundary when the accessing module's service owns a database
// different from the table's owner. Two transitional states are exempt: a
// service that owns no database yet (shared-database stage) and an access
// into a table that the accessor's database currently hosts as a read-only
// replica (sync window).
std::vector<Violation> isolation_violations(const SystemModel& model) {
  std::vector<Violation> out;
  for (const auto& [mid, table] : model.data_access) {
    const ServiceRecord* svc = model.service_of_module(mid);
    const DatabaseRecord* owner = model.owner_db_of_table(table);
    if (svc == nullptr || owner == nullptr) continue;
    if (svc->database.empty()) continue;
    if (svc->database == owner->id) continue;
    const DatabaseRecord* own_db = model.find_database(svc->database);
    if (own_db != nullptr) {
      auto it = own_db->tables.find(table);
      if (it != own_db->tables.end() &&
          it->second.mode == AccessMode::ReadOnlyReplica) {
        continue;
      }
    }
    out.push_back(Violation{"cross-database data access", mid,
                            "module of service " + svc->id + " accesses " +
                                table + " owned by " + owner->id});
  }
  for (const auto& fk : model.foreign_keys) {
    if (fk.enforcement != Enforcement::DatabaseLayer) continue;
    const DatabaseRecord* from = model.owner_db_of_table(fk.from_table);
    const DatabaseRecord* to = model.owner_db_of_table(fk.to_table);
    if (from == nullptr || to == nullptr) continue;
    if (from->id != to->id) {
      out.push_back(Violation{
          "cross-database foreign key",
          fk.from_table + "." + fk.from_column + "->" + fk.to_table,
          "database-layer key spans " + from->id + " and " + to->id});
    }
  }
  return out;
}

std::vector<Violation> validate(const SystemModel& model) {
  std::vector<Violation> out = validate_structure(model);
  std::vector<Violation> iso = isolation_violations(model);
  out.insert(out.end(), iso.begin(), iso.end());
  return out;
}

// ---------------------------------------------------------------------------
// JSON input/output
// ---------------------------------------------------------------------------

SystemModel load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::ParseError, "model document must be a JSON object");
  }

  SystemModel m;
  try {
    for (const auto& js : doc.value("services", json::array())) {
      ServiceRecord s;
      s.id = require_string(js, "id", "service");
      s.modules = js.value("modules", std::vector<std::string>{});
      s.database = js.value("database", std::string{});
      if (js.contains("kind")) {
        s.kind = service_kind_from_string(js["kind"].get<std::string>());
      } else {
        s.kind = doc["services"].size() == 1 ? ServiceKind::Monolith
                                             : ServiceKind::Extracted;
      }
      m.services.push_back(std::move(s));
    }
    for (const auto& jd : doc.value("databases", json::array())) {
      DatabaseRecord d;
      d.id = require_string(jd, "id", "database");
      for (const auto& jt : jd.value("tables", json::array())) {
        TableHosting h;
        h.def.name = require_string(jt, "name", "table");
        h.def.columns = jt.value("columns", std::vector<std::string>{});
        h.def.primary_key = require_string(jt, "primary_key", "table");
        h.def.lifecycle_owner = jt.value("lifecycle_owner", std::string{});
        h.mode = access_mode_from_string(
            jt.value("access_mode", std::string("read-write")));
        if (d.tables.count(h.def.name) != 0) {
          throw Error(ErrorCode::ValidationError,
                      "duplicate table " + h.def.name + " in " + d.id);
        }
        d.tables.emplace(h.def.name, std::move(h));
      }
      m.databases.push_back(std::move(d));
    }
    for (const auto& jm : doc.value("modules", json::array())) {
      ModuleNode node;
      node.id = require_string(jm, "id", "module");
      node.layer = layer_from_string(require_string(jm, "layer", "module"));
      node.context = require_string(jm, "context", "module");
      m.modules.push_back(std::move(node));
    }
    for (const auto& je : doc.value("edges", json::array())) {
      CallEdge e;
      e.from = require_string(je, "from", "edge");
      e.to = require_string(je, "to", "edge");
      e.kind = edge_kind_from_string(je.value("kind", std::string("local")));
      e.weight = je.value("weight", 1);
      m.edges.push_back(std::move(e));
    }
    for (const auto& jf : doc.value("foreign_keys", json::array())) {
      ForeignKey fk;
      fk.from_table = require_string(jf, "from_table", "foreign key");
      fk.from_column = require_string(jf, "from_column", "foreign key");
      fk.to_table = require_string(jf, "to_table", "foreign key");
      fk.enforcement = enforcement_from_string(
          jf.value("enforcement", std::string("database-layer")));
      m.foreign_keys.push_back(std::move(fk));
    }
    for (const auto& jp : doc.value("data_access", json::array())) {
      if (!jp.is_array() || jp.size() != 2) {
        throw Error(ErrorCode::ParseError,
                    "data_access entries must be [module, table] pairs");
      }
      m.data_access.emplace(jp[0].get<std::string>(), jp[1].get<std::string>());
    }
    if (doc.contains("endpoints")) {
      for (const auto& [path, mid] : doc["endpoints"].items()) {
        m.endpoints[path] = mid.get<std::string>();
      }
    }
    for (const auto& jr : doc.value("routes", json::array())) {
      RouteEntry r;
      r.path_prefix = require_string(jr, "path_prefix", "route");
      r.legacy_target = require_string(jr, "legacy_target", "route");
      if (jr.contains("extracted_target") && !jr["extracted_target"].is_null()) {
        r.extracted_target = jr["extracted_target"].get<std::string>();
      }
      r.shift_percent = jr.value("shift_percent", 0);
      m.routes.push_back(std::move(r));
    }
    m.frozen = doc.value("frozen", false);
    for (const auto& jg : doc.value("glue", json::array())) {
      GlueRecord g;
      g.context = require_string(jg, "context", "glue");
      g.service = require_string(jg, "service", "glue");
      g.monolith = require_string(jg, "monolith", "glue");
      g.read_edge.from_module = jg["read_edge"]["from"].get<std::string>();
      g.read_edge.to_module = jg["read_edge"]["to"].get<std::string>();
      g.write_edge.from_module = jg["write_edge"]["from"].get<std::string>();
      g.write_edge.to_module = jg["write_edge"]["to"].get<std::string>();
      if (jg.contains("field_map")) {
        for (const auto& [k, v] : jg["field_map"].items()) {
          g.field_map[k] = v.get<std::string>();
        }
      }
      m.glue.push_back(std::move(g));
    }
    for (const auto& jb : doc.value("data_bridges", json::array())) {
      DataBridge b;
      b.module = require_string(jb, "module", "data bridge");
      b.table = require_string(jb, "table", "data bridge");
      b.via_service = require_string(jb, "via_service", "data bridge");
      m.data_bridges.push_back(std::move(b));
    }
    for (const auto& js : doc.value("sync_states", json::array())) {
      SyncState st;
      st.target_db = require_string(js, "target_db", "sync state");
      st.applied_seq = js.value("applied_seq", 0ull);
      st.mode = sync_mode_from_string(require_string(js, "mode", "sync state"));
      m.sync_states[st.target_db] = st;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }

  std::vector<Violation> violations = validate_structure(m);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw Error(ErrorCode::ValidationError,
                v.rule + " (" + v.subject + "): " + v.detail);
  }
  return m;
}

std::string serialize(const SystemModel& model) {
  json doc;
  doc["services"] = json::array();
  for (const auto& s : model.services) {
    json js;
    js["id"] = s.id;
    js["kind"] = service_kind_name(s.kind);
    js["modules"] = s.modules;
    if (!s.database.empty()) js["database"] = s.database;
    doc["services"].push_back(js);
  }
  doc["databases"] = json::array();
  for (const auto& d : model.databases) {
    json jd;
    jd["id"] = d.id;
    jd["tables"] = json::array();
    for (const auto& [name, hosting] : d.tables) {
      json jt;
      jt["name"] = name;
      jt["columns"] = hosting.def.columns;
      jt["primary_key"] = hosting.def.primary_key;
      if (!hosting.def.lifecycle_owner.empty()) {
        jt["lifecycle_owner"] = hosting.def.lifecycle_owner;
      }
      jt["access_mode"] = access_mode_name(hosting.mode);
      jd["tables"].push_back(jt);
    }
    doc["databases"].push_back(jd);
  }
  doc["modules"] = json::array();
  for (const auto& m : model.modules) {
    doc["modules"].push_back(json{
        {"id", m.id}, {"layer", layer_name(m.layer)}, {"context", m.context}});
  }
  doc["edges"] = json::array();
  for (const auto& e : model.edges) {
    doc["edges"].push_back(json{{"from", e.from},
                                {"to", e.to},
                                {"kind", edge_kind_name(e.kind)},
                                {"weight", e.weight}});
  }
  doc["foreign_keys"] = json::array();
  for (const auto& fk : model.foreign_keys) {
    doc["foreign_keys"].push_back(json{{"from_table", fk.from_table},
                                       {"from_column", fk.from_column},
                                       {"to_table", fk.to_table},
                                       {"enforcement",
                                        enforcement_name(fk.enforcement)}});
  }
  doc["data_access"] = json::array();
  for (const auto& [mid, table] : model.data_access) {
    doc["data_access"].push_back(json::array({mid, table}));
  }
  doc["endpoints"] = json::object();
  for (const auto& [path, mid] : model.endpoints) doc["endpoints"][path] = mid;
  doc["routes"] = json::array();
  for (const auto& r : model.routes) {
    json jr;
    jr["path_prefix"] = r.path_prefix;
    jr["legacy_target"] = r.legacy_target;
    if (r.extracted_target.empty()) {
      jr["extracted_target"] = nullptr;
    } else {
      jr["extracted_target"] = r.extracted_target;
    }
    jr["shift_percent"] = r.shift_percent;
    doc["routes"].push_back(jr);
  }
  if (model.frozen) doc["frozen"] = true;
  if (!model.glue.empty()) {
    doc["glue"] = json::array();
    for (const auto& g : model.glue) {
      json jg;
      jg["context"] = g.context;
      jg["service"] = g.service;
      jg["monolith"] = g.monolith;
      jg["read_edge"] = json{{"from", g.read_edge.from_module},
                             {"to", g.read_edge.to_module}};
      jg["write_edge"] = json{{"from", g.write_edge.from_module},
                              {"to", g.write_edge.to_module}};
      jg["field_map"] = g.field_map;
      doc["glue"].push_back(jg);
    }
  }
  if (!model.data_bridges.empty()) {
    doc["data_bridges"] = json::array();
    for (const auto& b : model.data_bridges) {
      doc["data_bridges"].push_back(json{
          {"module", b.module}, {"table", b.table}, {"via_service", b.via_service}});
    }
  }
  if (!model.sync_states.empty()) {
    doc["sync_states"] = json::array();
    for (const auto& [db, st] : model.sync_states) {
      doc["sync_states"].push_back(json{{"target_db", st.target_db},
                                        {"applied_seq", st.applied_seq},
                                        {"mode", sync_mode_name(st.mode)}});
    }
  }
  return doc.dump(2);
}

WorkloadTrace load_trace(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::ParseError, "trace document must be a JSON array");
  }
  WorkloadTrace trace;
  std::uint64_t last_seq = 0;
  for (const auto& jr : doc) {
    TraceRequest r;
    if (!jr.contains("seq") || !jr["seq"].is_number_unsigned()) {
      throw Error(ErrorCode::ParseError, "request missing integer seq");
    }
    r.seq = jr["seq"].get<std::uint64_t>();
    r.endpoint = require_string(jr, "endpoint", "request");
    r.key = require_string(jr, "key", "request");
    std::string op = require_string(jr, "op", "request");
    if (op == "read") {
      r.op = TraceOp::Read;
    } else if (op == "write") {
      r.op = TraceOp::Write;
    } else {
      throw Error(ErrorCode::ParseError, "invalid op: " + op);
    }
    r.table = require_string(jr, "table", "request");
    r.row_key = require_string(jr, "row_key", "request");
    if (!trace.empty() && r.seq <= last_seq) {
      throw Error(ErrorCode::ValidationError,
                  "seq not strictly increasing at " + std::to_string(r.seq));
    }
    last_seq = r.seq;
    trace.push_back(std::move(r));
  }
  return trace;
}

std::vector<Violation> validate_trace(const SystemModel& model,
                                      const WorkloadTrace& trace) {
  std::vector<Violation> out;
  for (const auto& r : trace) {
    if (model.endpoints.find(r.endpoint) == model.endpoints.end()) {
      out.push_back(Violation{"unbound endpoint", r.endpoint,
                              "request " + std::to_string(r.seq)});
    }
  }
  return out;
}

}  // namespace stranglerkit

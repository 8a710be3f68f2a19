#include "stranglerkit/dbsplit.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "json.hpp"

namespace stranglerkit {

using nlohmann::json;

namespace {

void require_context(const SystemModel& model, const std::string& context) {
  if (!model.has_context(context)) {
    throw Error(ErrorCode::UnknownContext, "no such context: " + context);
  }
}

std::string slug(const std::string& context) {
  std::string out;
  for (char c : context) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += '-';
    }
  }
  return out;
}

/// The extracted service carrying the context's modules, if any.
const ServiceRecord* extracted_service_for(const SystemModel& model,
                                           const std::string& context) {
  const ServiceRecord* expected = model.find_service(service_id_for_context(context));
  if (expected != nullptr) return expected;
  for (const auto& s : model.services) {
    if (s.kind != ServiceKind::Extracted) continue;
    for (const auto& mid : s.modules) {
      const ModuleNode* m = model.find_module(mid);
      if (m != nullptr && m->context == context) return &s;
    }
  }
  return nullptr;
}

}  // namespace

const char* change_op_name(ChangeOp op) {
  switch (op) {
    case ChangeOp::Insert: return "insert";
    case ChangeOp::Update: return "update";
    case ChangeOp::Delete: return "delete";
  }
  return "insert";
}

std::string service_id_for_context(const std::string& context) {
  return "svc-" + slug(context);
}

std::string replica_db_id_for_context(const std::string& context) {
  return service_id_for_context(context) + "-db";
}

std::set<std::string> related_tables(const SystemModel& model,
                                     const std::string& context) {
  return related_tables_report(model, context).tables;
}

RelatedReport related_tables_report(const SystemModel& model,
                                    const std::string& context) {
  require_context(model, context);
  RelatedReport report;
  for (const auto& [mid, table] : model.data_access) {
    const ModuleNode* m = model.find_module(mid);
    if (m == nullptr) continue;
    if (m->context == context) report.tables.insert(table);
  }
  for (const auto& [mid, table] : model.data_access) {
    const ModuleNode* m = model.find_module(mid);
    if (m == nullptr) continue;
    if (m->context != context && report.tables.count(table) != 0) {
      report.shared.insert(table);
    }
  }
  return report;
}

std::set<std::string> moving_tables(const SystemModel& model,
                                    const std::string& context) {
  RelatedReport report = related_tables_report(model, context);
  std::set<std::string> moving;
  for (const auto& t : report.tables) {
    const TableDef* def = model.find_table(t);
    if (def == nullptr) continue;
    if (!def->lifecycle_owner.empty()) {
      if (def->lifecycle_owner == context) moving.insert(t);
    } else if (report.shared.count(t) == 0) {
      moving.insert(t);
    }
    // Shared tables with no declared lifecycle owner stay with the current
    // owner — the conservative default.
  }
  return moving;
}

SystemModel hoist_constraints(const SystemModel& model,
                              const std::string& context) {
  std::set<std::string> moving = moving_tables(model, context);
  SystemModel out = model;
  for (auto& fk : out.foreign_keys) {
    bool from_moves = moving.count(fk.from_table) != 0;
    bool to_moves = moving.count(fk.to_table) != 0;
    if (from_moves != to_moves) {
      fk.enforcement = Enforcement::BusinessLogicLayer;
    }
  }
  return out;
}

SystemModel mirror_schema(const SystemModel& model,
                          const std::string& context) {
  require_context(model, context);
  const ServiceRecord* svc = extracted_service_for(model, context);
  if (svc == nullptr) {
    throw Error(ErrorCode::PreconditionFailed,
                "context " + context + " has no extracted service to own a database");
  }
  std::string db_id = replica_db_id_for_context(context);
  if (model.find_database(db_id) != nullptr || !svc->database.empty()) {
    throw Error(ErrorCode::AlreadyMirrored,
                "replica database already exists for context " + context);
  }

  // Constraints must be hoisted before the schema is copied.
  std::set<std::string> moving = moving_tables(model, context);
  for (const auto& fk : model.foreign_keys) {
    bool from_moves = moving.count(fk.from_table) != 0;
    bool to_moves = moving.count(fk.to_table) != 0;
    if (from_moves != to_moves && fk.enforcement == Enforcement::DatabaseLayer) {
      throw Error(ErrorCode::PreconditionFailed,
                  "constraints not hoisted: database-layer key " +
                      fk.from_table + "." + fk.from_column + "->" +
                      fk.to_table + " crosses the boundary");
    }
  }

  SystemModel out = model;
  DatabaseRecord replica;
  replica.id = db_id;
  for (const auto& t : related_tables(model, context)) {
    const TableDef* def = model.find_table(t);
    if (def == nullptr) continue;
    TableHosting hosting;
    hosting.def = *def;
    hosting.mode = AccessMode::ReadOnlyReplica;
    replica.tables.emplace(t, std::move(hosting));
  }
  out.databases.push_back(std::move(replica));
  for (auto& s : out.services) {
    if (s.id == svc->id) s.database = db_id;
  }
  SyncState st;
  st.target_db = db_id;
  st.applied_seq = 0;
  st.mode = SyncMode::Mirrored;
  out.sync_states[db_id] = st;
  return out;
}

RowStore make_replica_store(const SystemModel& model,
                            const std::string& db_id) {
  const DatabaseRecord* db = model.find_database(db_id);
  if (db == nullptr) {
    throw Error(ErrorCode::UnknownTable, "no such database: " + db_id);
  }
  RowStore store;
  for (const auto& [name, hosting] : db->tables) {
    store.tables[name];  // empty map
  }
  return store;
}

void apply_change_inplace(RowStore& replica, SyncState& state,
                          const ChangeRecord& change) {
  if (state.mode != SyncMode::Syncing) {
    throw Error(ErrorCode::WrongMode,
                std::string("replica is ") + sync_mode_name(state.mode) +
                    ", sync apply requires syncing");
  }
  auto it = replica.tables.find(change.table);
  if (it == replica.tables.end()) {
    throw Error(ErrorCode::UnknownTable,
                "replica does not host table " + change.table);
  }
  if (change.seq <= state.applied_seq) return;  // already applied
  switch (change.op) {
    case ChangeOp::Insert:
    case ChangeOp::Update:
      it->second[change.row_key] = change.row_digest;
      break;
    case ChangeOp::Delete:
      it->second.erase(change.row_key);  // tolerant: absent key is a no-op
      break;
  }
  state.applied_seq = std::max(state.applied_seq, change.seq);
}

std::pair<RowStore, SyncState> apply_change(const RowStore& replica,
                                            const SyncState& state,
                                            const ChangeRecord& change) {
  RowStore store = replica;
  SyncState st = state;
  apply_change_inplace(store, st, change);
  return {std::move(store), std::move(st)};
}

std::pair<RowStore, SyncState> sync_until_quiescent(
    const std::vector<ChangeRecord>& source_log, const RowStore& replica,
    const SyncState& state) {
  if (state.mode != SyncMode::Syncing) {
    throw Error(ErrorCode::WrongMode,
                std::string("replica is ") + sync_mode_name(state.mode) +
                    ", sync requires syncing");
  }
  RowStore store = replica;
  SyncState st = state;
  for (const auto& change : source_log) {
    if (store.tables.find(change.table) == store.tables.end()) continue;
    apply_change_inplace(store, st, change);
  }
  st.mode = SyncMode::Converged;
  return {std::move(store), std::move(st)};
}

RowStore project_log(const std::vector<ChangeRecord>& log,
                     const std::set<std::string>& tables) {
  RowStore store;
  for (const auto& t : tables) store.tables[t];
  std::uint64_t last = 0;
  for (const auto& change : log) {
    if (change.seq <= last) continue;  // duplicate replay
    last = change.seq;
    auto it = store.tables.find(change.table);
    if (it == store.tables.end()) continue;
    switch (change.op) {
      case ChangeOp::Insert:
      case ChangeOp::Update:
        it->second[change.row_key] = change.row_digest;
        break;
      case ChangeOp::Delete:
        it->second.erase(change.row_key);
        break;
    }
  }
  return store;
}

SystemModel cutover(const SystemModel& model, const std::string& context) {
  require_context(model, context);
  const ServiceRecord* svc = extracted_service_for(model, context);
  std::string db_id = replica_db_id_for_context(context);
  auto st_it = model.sync_states.find(db_id);
  if (svc == nullptr || svc->database != db_id ||
      st_it == model.sync_states.end()) {
    throw Error(ErrorCode::NotConverged,
                "context " + context + " has no synced replica database");
  }
  if (st_it->second.mode != SyncMode::Converged) {
    throw Error(ErrorCode::NotConverged,
                std::string("replica is ") +
                    sync_mode_name(st_it->second.mode) +
                    ", cutover requires converged");
  }

  std::set<std::string> related = related_tables(model, context);
  std::set<std::string> moving = moving_tables(model, context);

  SystemModel out = model;
  // Transfer ownership of moving tables; drop the rest of the replica.
  for (auto& d : out.databases) {
    if (d.id == db_id) {
      for (auto it = d.tables.begin(); it != d.tables.end();) {
        if (moving.count(it->first) != 0) {
          it->second.mode = AccessMode::ReadWrite;
          ++it;
        } else {
          it = d.tables.erase(it);
        }
      }
    } else {
      for (const auto& t : moving) d.tables.erase(t);
    }
  }

  // Rewrite every data access that now crosses the ownership boundary into a
  // bridge through the owning service's API.
  std::set<std::pair<std::string, std::string>> kept;
  for (const auto& [mid, table] : out.data_access) {
    if (related.count(table) == 0) {
      kept.insert({mid, table});
      continue;
    }
    const ServiceRecord* accessor = out.service_of_module(mid);
    const DatabaseRecord* owner_db = out.owner_db_of_table(table);
    const ServiceRecord* owner_svc =
        owner_db == nullptr ? nullptr : out.service_owning_db(owner_db->id);
    if (accessor != nullptr && owner_svc != nullptr &&
        accessor->id != owner_svc->id) {
      out.data_bridges.push_back(DataBridge{mid, table, owner_svc->id});
    } else {
      kept.insert({mid, table});
    }
  }
  out.data_access = std::move(kept);

  out.sync_states[db_id].mode = SyncMode::Cutover;
  return out;
}

std::vector<Violation> verify_isolation(const SystemModel& model) {
  return isolation_violations(model);
}

void assert_writable(const SystemModel& model, const std::string& db_id,
                     const std::string& table) {
  const DatabaseRecord* db = model.find_database(db_id);
  if (db == nullptr) {
    throw Error(ErrorCode::UnknownTable, "no such database: " + db_id);
  }
  auto it = db->tables.find(table);
  if (it == db->tables.end()) {
    throw Error(ErrorCode::UnknownTable,
                db_id + " does not host table " + table);
  }
  if (it->second.mode != AccessMode::ReadWrite) {
    throw Error(ErrorCode::WrongMode, "read-only replica");
  }
}

std::vector<ChangeRecord> load_change_log(const std::string& text) {
  std::vector<ChangeRecord> log;
  std::istringstream in(text);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    ChangeRecord rec;
    try {
      rec.seq = j.at("seq").get<std::uint64_t>();
      rec.table = j.at("table").get<std::string>();
      rec.row_key = j.at("row_key").get<std::string>();
      std::string op = j.at("op").get<std::string>();
      if (op == "insert") {
        rec.op = ChangeOp::Insert;
      } else if (op == "update") {
        rec.op = ChangeOp::Update;
      } else if (op == "delete") {
        rec.op = ChangeOp::Delete;
      } else {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": invalid op " + op);
      }
      rec.row_digest = j.value("row_digest", std::string{});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    log.push_back(std::move(rec));
  }
  return log;
}

std::string serialize_change_log(const std::vector<ChangeRecord>& log) {
  std::string out;
  for (const auto& rec : log) {
    json j;
    j["seq"] = rec.seq;
    j["table"] = rec.table;
    j["row_key"] = rec.row_key;
    j["op"] = change_op_name(rec.op);
    j["row_digest"] = rec.row_digest;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace stranglerkit

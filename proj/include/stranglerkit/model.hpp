#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stranglerkit/errors.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Domain types. A SystemModel is a declarative description of the application
// under migration: services, modules, call edges, databases, tables, foreign
// keys, routes and endpoint bindings. Models are immutable values: the
// migration operations in planner/dbsplit take a model and return a new one.
// ---------------------------------------------------------------------------

enum class Layer { UserInterface, BusinessLogic, DataAccess };
enum class EdgeKind { Local, Api };
enum class Enforcement { DatabaseLayer, BusinessLogicLayer };
enum class AccessMode { ReadWrite, ReadOnlyReplica };
enum class SyncMode { Mirrored, Syncing, Converged, Cutover };
enum class ServiceKind { Monolith, Frontend, Extracted };

struct ModuleNode {
  std::string id;
  Layer layer = Layer::BusinessLogic;
  std::string context;

  bool operator==(const ModuleNode&) const = default;
};

struct CallEdge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Local;
  int weight = 1;

  bool operator==(const CallEdge&) const = default;
};

struct TableDef {
  std::string name;
  std::vector<std::string> columns;
  std::string primary_key;
  // Context that manages the entity's life cycle. Decides which side keeps a
  // shared table when the database splits. Empty means the current owner
  // keeps it.
  std::string lifecycle_owner;

  bool operator==(const TableDef&) const = default;
};

struct TableHosting {
  TableDef def;
  AccessMode mode = AccessMode::ReadWrite;

  bool operator==(const TableHosting&) const = default;
};

struct DatabaseRecord {
  std::string id;
  std::map<std::string, TableHosting> tables;  // by table name

  bool operator==(const DatabaseRecord&) const = default;
};

struct ForeignKey {
  std::string from_table;
  std::string from_column;
  std::string to_table;  // references to_table's primary key
  Enforcement enforcement = Enforcement::DatabaseLayer;

  bool operator==(const ForeignKey&) const = default;
};

struct ServiceRecord {
  std::string id;
  ServiceKind kind = ServiceKind::Extracted;
  std::vector<std::string> modules;  // registration order
  std::string database;              // empty while the service has no own db

  bool operator==(const ServiceRecord&) const = default;
};

struct RouteEntry {
  std::string path_prefix;
  std::string legacy_target;
  std::string extracted_target;  // empty = absent
  int shift_percent = 0;

  bool operator==(const RouteEntry&) const = default;
};

/// Glue code / anti-corruption layer between an extracted service and the
/// monolith's data access: a pair of adapter edges plus a column mapping
/// (source column -> service-facing name).
struct GlueAdapterEdge {
  std::string from_module;
  std::string to_module;

  bool operator==(const GlueAdapterEdge&) const = default;
};

struct GlueRecord {
  std::string context;
  std::string service;   // extracted side
  std::string monolith;  // legacy side
  GlueAdapterEdge read_edge;
  GlueAdapterEdge write_edge;
  std::map<std::string, std::string> field_map;

  bool operator==(const GlueRecord&) const = default;
};

/// Sanctioned cross-service data access after cutover: the module reaches the
/// table through the owning service's API instead of touching the database.
struct DataBridge {
  std::string module;
  std::string table;
  std::string via_service;

  bool operator==(const DataBridge&) const = default;
};

struct SyncState {
  std::string target_db;
  std::uint64_t applied_seq = 0;
  SyncMode mode = SyncMode::Mirrored;

  bool operator==(const SyncState&) const = default;
};

struct SystemModel {
  std::vector<ServiceRecord> services;
  std::vector<DatabaseRecord> databases;
  std::vector<ModuleNode> modules;
  std::vector<CallEdge> edges;
  std::vector<ForeignKey> foreign_keys;
  std::set<std::pair<std::string, std::string>> data_access;  // (module, table)
  std::map<std::string, std::string> endpoints;               // path -> module
  std::vector<RouteEntry> routes;

  // Migration state. Absent in a plain monolith document.
  bool frozen = false;
  std::vector<GlueRecord> glue;
  std::vector<DataBridge> data_bridges;
  std::map<std::string, SyncState> sync_states;  // by replica database id

  bool operator==(const SystemModel&) const = default;

  // Lookups. Models are small; these scan.
  const ServiceRecord* find_service(const std::string& id) const;
  const ServiceRecord* monolith() const;
  const ServiceRecord* service_of_module(const std::string& module_id) const;
  const ModuleNode* find_module(const std::string& id) const;
  const DatabaseRecord* find_database(const std::string& id) const;
  /// Database hosting the table read-write, i.e. its owner.
  const DatabaseRecord* owner_db_of_table(const std::string& table) const;
  const ServiceRecord* service_owning_db(const std::string& db_id) const;
  const TableDef* find_table(const std::string& name) const;
  std::set<std::string> contexts() const;
  bool has_context(const std::string& context) const;
};

struct Violation {
  std::string rule;
  std::string subject;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// ---------------------------------------------------------------------------
// Workload traces: request sequences replayed against a model to check
// behavioral equivalence across migration steps.
// ---------------------------------------------------------------------------

enum class TraceOp { Read, Write };

struct TraceRequest {
  std::uint64_t seq = 0;
  std::string endpoint;
  std::string key;  // routing key
  TraceOp op = TraceOp::Read;
  std::string table;
  std::string row_key;

  bool operator==(const TraceRequest&) const = default;
};

using WorkloadTrace = std::vector<TraceRequest>;

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses and validates a model document (JSON, format in
/// schemas/model.schema.json). Throws Error{ParseError} on malformed input and
/// Error{ValidationError} naming the violated rule on structural violations.
SystemModel load_model(const std::string& text);

/// Canonical serialization; load_model(serialize(m)) == m for valid models.
std::string serialize(const SystemModel& model);

/// Full validation report: structural rules plus the cross-database isolation
/// scan (same findings as dbsplit's verifier). Violations are data, not
/// errors; an empty report means the model is well-formed and isolated.
std::vector<Violation> validate(const SystemModel& model);

/// Structural rules only; this is what load_model enforces.
std::vector<Violation> validate_structure(const SystemModel& model);

/// Cross-database isolation scan only: data accesses that bypass the owning
/// service's API and database-layer foreign keys spanning two databases.
std::vector<Violation> isolation_violations(const SystemModel& model);

/// Parses a trace document (JSON array). Enforces strictly increasing seq.
WorkloadTrace load_trace(const std::string& text);

/// Endpoint-binding check against a model; one violation per unbound endpoint.
std::vector<Violation> validate_trace(const SystemModel& model,
                                      const WorkloadTrace& trace);

const char* layer_name(Layer layer);
const char* sync_mode_name(SyncMode mode);

}  // namespace stranglerkit

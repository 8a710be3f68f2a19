#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stranglerkit/model.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Database decomposition: related-table discovery, constraint hoisting,
// schema mirroring into a read-only replica, ordered change-log sync,
// cutover, and isolation verification.
// ---------------------------------------------------------------------------

enum class ChangeOp { Insert, Update, Delete };

struct ChangeRecord {
  std::uint64_t seq = 0;  // strictly increasing within a source log
  std::string table;
  std::string row_key;
  ChangeOp op = ChangeOp::Insert;
  std::string row_digest;  // content hash; empty for deletes

  bool operator==(const ChangeRecord&) const = default;
};

/// Content-addressed row state: per table, row_key -> row_digest. Real column
/// values are out of scope; digests suffice to prove convergence.
struct RowStore {
  std::map<std::string, std::map<std::string, std::string>> tables;

  bool operator==(const RowStore&) const = default;
};

struct RelatedReport {
  std::set<std::string> tables;  // touched by the context's modules
  std::set<std::string> shared;  // also touched by modules outside the context

  bool operator==(const RelatedReport&) const = default;
};

/// Tables reachable via data_access pairs from modules of the context.
std::set<std::string> related_tables(const SystemModel& model,
                                     const std::string& context);

/// related_tables plus the subset also accessed from outside the context.
RelatedReport related_tables_report(const SystemModel& model,
                                    const std::string& context);

/// The tables that will belong to the context's database after cutover:
/// related tables that either declare the context as lifecycle owner or are
/// unshared with no declared owner. Shared tables with another (or no)
/// declared owner stay behind.
std::set<std::string> moving_tables(const SystemModel& model,
                                    const std::string& context);

/// Deterministic ids for the artifacts the split creates for a context.
std::string service_id_for_context(const std::string& context);
std::string replica_db_id_for_context(const std::string& context);

/// Re-labels every foreign key that spans the moving-table boundary from
/// database-layer to business-logic-layer enforcement. Idempotent; keys on
/// one side of the boundary are untouched.
SystemModel hoist_constraints(const SystemModel& model,
                              const std::string& context);

/// Creates the extracted service's database: structural copies of the
/// related tables, hosted read-only-replica, with a SyncState in mode
/// mirrored. Requires the context's service to exist and the crossing
/// constraints to have been hoisted first.
SystemModel mirror_schema(const SystemModel& model, const std::string& context);

/// Empty per-table maps for every table hosted by the given database.
RowStore make_replica_store(const SystemModel& model, const std::string& db_id);

/// Applies one change to a replica. Idempotent by seq: a change with
/// seq <= state.applied_seq is a no-op. Delete of an absent key is a no-op
/// (tolerant replay, enabling at-least-once delivery).
std::pair<RowStore, SyncState> apply_change(const RowStore& replica,
                                            const SyncState& state,
                                            const ChangeRecord& change);

/// In-place variant used by the sync loop and bulk tests.
void apply_change_inplace(RowStore& replica, SyncState& state,
                          const ChangeRecord& change);

/// Applies every log entry for the replica's tables in seq order, then marks
/// the state converged (the provided log is the entire pending backlog, so
/// the source is quiescent once it is consumed). Entries for tables the
/// replica does not host are skipped.
std::pair<RowStore, SyncState> sync_until_quiescent(
    const std::vector<ChangeRecord>& source_log, const RowStore& replica,
    const SyncState& state);

/// Source-side projection: the row state produced by replaying a log onto an
/// empty store restricted to `tables`. This is the convergence oracle's
/// definition of truth and is exposed so callers can assert replica == it.
RowStore project_log(const std::vector<ChangeRecord>& log,
                     const std::set<std::string>& tables);

/// Transfers ownership: moving tables become read-write in the replica and
/// leave the source database; non-moving related tables are dropped from the
/// replica; every data_access pair that now crosses the ownership boundary is
/// rewritten into a DataBridge through the owning service's API. Requires the
/// sync state to be converged.
SystemModel cutover(const SystemModel& model, const std::string& context);

/// Violations for every data_access pair and database-layer foreign key that
/// crosses a database-ownership boundary. Empty iff fully isolated.
std::vector<Violation> verify_isolation(const SystemModel& model);

/// Guard for the runtime write path: direct row writes are only legal
/// against a read-write host. Throws Error{WrongMode, "read-only replica"}
/// when the hosting is a replica, Error{UnknownTable} when the database does
/// not host the table.
void assert_writable(const SystemModel& model, const std::string& db_id,
                     const std::string& table);

// Change-log file format: JSON lines, one record per line.
std::vector<ChangeRecord> load_change_log(const std::string& text);
std::string serialize_change_log(const std::vector<ChangeRecord>& log);

const char* change_op_name(ChangeOp op);

}  // namespace stranglerkit

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stranglerkit/dbsplit.hpp"
#include "stranglerkit/model.hpp"
#include "stranglerkit/planner.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Deterministic trace replay. Requests flow from their endpoint's module
// through the call graph; data operations touch content-addressed row state.
// Response digests depend on the visited modules and the data, but not on
// which service or database hosts them — so a correct migration step leaves
// every digest unchanged, and a digest change is the rollback trigger.
// ---------------------------------------------------------------------------

struct Counters {
  std::uint64_t local_calls = 0;
  std::uint64_t api_calls = 0;
  std::uint64_t db_calls = 0;
  std::uint64_t cross_boundary_api_calls = 0;
  std::uint64_t glue_calls = 0;

  bool operator==(const Counters&) const = default;
};

struct CounterDeltas {
  std::int64_t local_calls = 0;
  std::int64_t api_calls = 0;
  std::int64_t db_calls = 0;
  std::int64_t cross_boundary_api_calls = 0;
  std::int64_t glue_calls = 0;

  bool operator==(const CounterDeltas&) const = default;
};

CounterDeltas counter_deltas(const Counters& from, const Counters& to);

struct ResponseRecord {
  std::uint64_t seq = 0;
  std::string module;  // the module that performed the data operation
  std::string digest;

  bool operator==(const ResponseRecord&) const = default;
};

struct ExecutionReport {
  std::vector<ResponseRecord> responses;
  Counters metrics;
  // Ordered capture of every write the trace performed, in the change-log
  // format dbsplit replays. Identical across correct migration steps.
  std::vector<ChangeRecord> change_log;

  bool operator==(const ExecutionReport&) const = default;
};

struct Divergence {
  std::uint64_t seq = 0;
  std::string digest_a;
  std::string digest_b;

  bool operator==(const Divergence&) const = default;
};

/// Replays the trace against the model. Fully deterministic given
/// (model, trace, seed). `replicas` runs the request stream against N
/// identical copies of the service topology behind a round-robin balancer;
/// because modules are stateless and row state lives in the shared
/// database, the report is identical for every N >= 1 (the horizontal-
/// scaling baseline).
/// Throws UnboundEndpoint, NoRouteMatched, and IsolationBreach (a direct
/// cross-database access — impossible in models that pass verify_isolation).
ExecutionReport execute_trace(const SystemModel& model,
                              const WorkloadTrace& trace, std::uint64_t seed,
                              int replicas = 1);

/// nullopt when the reports' response digests match pairwise; otherwise the
/// first diverging seq. Throws TraceMismatch when the reports do not cover
/// the same request sequence.
std::optional<Divergence> equivalence_check(const ExecutionReport& a,
                                            const ExecutionReport& b);

struct StepReport {
  MigrationStep step;
  bool equivalent = false;
  bool rolled_back = false;
  Counters metrics;
  CounterDeltas deltas;  // vs baseline
  std::optional<Divergence> divergence;
};

struct MigrationOptions {
  // Fault injection: after applying the step with this id, rebind one
  // endpoint to a different module so the re-execution diverges. 0 = off.
  int corrupt_step_id = 0;
};

struct MigrationReport {
  ExecutionReport baseline;
  std::vector<StepReport> steps;
  bool completed = false;  // every plan step applied and equivalent
  std::vector<Violation> final_isolation;
  SystemModel final_model;
};

/// Applies the plan step by step; after each, re-executes the trace and
/// compares against the baseline. On divergence the step is rolled back,
/// marked, and the run stops. On completion the final model is isolation-
/// verified. StartSync additionally drives the row-level sync machinery on
/// the captured change log and cross-checks it against the projection.
MigrationReport run_migration(const SystemModel& model,
                              const MigrationPlan& plan,
                              const WorkloadTrace& trace, std::uint64_t seed,
                              const MigrationOptions& opts = {});

std::string report_to_json(const ExecutionReport& report);
std::string migration_report_to_json(const MigrationReport& report);

}  // namespace stranglerkit

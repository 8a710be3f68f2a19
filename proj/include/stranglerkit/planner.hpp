#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stranglerkit/dbsplit.hpp"
#include "stranglerkit/model.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Strangler-fig migration plans: an ordered, invertible step sequence that
// extracts one bounded context out of the monolith, splits its data off, and
// shifts traffic over in increments.
// ---------------------------------------------------------------------------

enum class StepKind {
  FreezeMonolith,
  SplitFrontend,
  ExtractService,
  AddGlueCode,
  AddGatewayRoute,
  MirrorTables,
  StartSync,
  Cutover,
  ShiftTraffic,
  RemoveGlue,
};

struct MigrationStep {
  int id = 0;           // position in the plan, 1-based
  StepKind kind = StepKind::FreezeMonolith;
  std::string context;  // ExtractService/AddGlueCode/MirrorTables/StartSync/
                        // Cutover/RemoveGlue/AddGatewayRoute
  std::string path;     // AddGatewayRoute/ShiftTraffic
  int percent = 0;      // ShiftTraffic

  bool operator==(const MigrationStep&) const = default;
};

struct MigrationPlan {
  std::string target;
  std::vector<MigrationStep> steps;

  bool operator==(const MigrationPlan&) const = default;
};

/// Extra inputs a step may consume when applied. StartSync drains the given
/// change log into the replica before declaring convergence; with no log the
/// source is already quiescent and the replica converges empty.
struct ApplyContext {
  const std::vector<ChangeRecord>* source_log = nullptr;
};

/// Generates the canonical step sequence for extracting `target`:
/// FreezeMonolith, SplitFrontend, ExtractService, AddGlueCode,
/// AddGatewayRoute, MirrorTables, StartSync, Cutover, one ShiftTraffic per
/// entry of `shifts` (non-decreasing, ending at 100), RemoveGlue. Data steps
/// are omitted when the target touches no tables; gateway steps are omitted
/// when no endpoint is bound to the target's modules.
MigrationPlan generate_plan(const SystemModel& model, const std::string& target,
                            const std::vector<int>& shifts = {10, 50, 100});

/// Applies one step, returning a new model; the input is never mutated.
/// Throws PreconditionFailed naming the unmet precondition, UnknownStep for
/// an unrecognized kind, and propagates the dbsplit errors (AlreadyMirrored,
/// NotConverged, ...) for the data steps.
SystemModel apply_step(const SystemModel& model, const MigrationStep& step,
                       const ApplyContext& ctx = {});

/// Apply/rollback journal. Rollback restores the recorded pre-state of the
/// most recently applied step; steps are not required to be arithmetically
/// invertible.
class Journal {
 public:
  SystemModel apply(const SystemModel& model, const MigrationStep& step,
                    const ApplyContext& ctx = {});
  /// Throws NothingToRollback on an empty journal and NotLastApplied when
  /// `step` is not the most recently applied step.
  SystemModel rollback(const MigrationStep& step);
  SystemModel rollback_last();
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const MigrationStep* last_step() const;

 private:
  struct Entry {
    MigrationStep step;
    SystemModel pre;
  };
  std::vector<Entry> entries_;
};

/// Free-function form: rolls back `step` against the journal, returning the
/// pre-application model.
SystemModel rollback_step(Journal& journal, const MigrationStep& step);

// Plan file format: JSON {"target": ..., "steps": [{id, kind, params}]}.
MigrationPlan load_plan(const std::string& text);
std::string serialize_plan(const MigrationPlan& plan);

const char* step_kind_name(StepKind kind);
StepKind step_kind_from_name(const std::string& name);

}  // namespace stranglerkit

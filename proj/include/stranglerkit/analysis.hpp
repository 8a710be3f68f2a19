#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stranglerkit/model.hpp"

namespace stranglerkit {

// ---------------------------------------------------------------------------
// Context-level dependency analysis: collapse the module call graph onto
// bounded contexts and rank contexts as extraction candidates by how little
// they are coupled to the rest of the system.
// ---------------------------------------------------------------------------

struct ContextGraph {
  std::set<std::string> nodes;
  // Directed inter-context edges; weight is the summed weight of module
  // edges crossing from a module of `first` to a module of `second`.
  // No self-loops.
  std::map<std::pair<std::string, std::string>, int> edges;

  bool operator==(const ContextGraph&) const = default;
};

struct CouplingScore {
  std::string context;
  int in_degree = 0;
  int out_degree = 0;
  int total = 0;  // in_degree + out_degree

  bool operator==(const CouplingScore&) const = default;
};

/// Collapses the module call graph to contexts. One node per context present
/// in the model; an edge (X,Y) exists iff some CallEdge runs from a module of
/// X to a module of Y with X != Y. With `weighted` false every crossing
/// module edge contributes 1 instead of its weight (edge count rather than
/// call volume).
ContextGraph build_context_graph(const SystemModel& model,
                                 bool weighted = true);

/// One score per node, sorted by context label. in_degree / out_degree are
/// the summed weights of incoming / outgoing edges.
std::vector<CouplingScore> coupling_scores(const ContextGraph& graph);

/// Contexts ordered ascending by total coupling, ties broken by label. The
/// head of the list is the recommended first extraction.
std::vector<std::string> rank_candidates(const ContextGraph& graph);

/// Heuristic context proposal: connected components over module edges whose
/// weight strictly exceeds `threshold`. Purely advisory — never mutates the
/// model. Deterministic: component labels are "ctx-1", "ctx-2", ... assigned
/// in order of each component's smallest module id; the seed is accepted for
/// interface stability and recorded in the proposal but does not change the
/// grouping.
struct ContextProposal {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> labels;  // module id -> proposed context

  bool operator==(const ContextProposal&) const = default;
};

ContextProposal infer_contexts(const SystemModel& model, std::uint64_t seed,
                               int threshold = 0);

}  // namespace stranglerkit

#include "stranglerkit/analysis.hpp"

#include <algorithm>

namespace stranglerkit {

ContextGraph build_context_graph(const SystemModel& model, bool weighted) {
  ContextGraph g;
  std::map<std::string, std::string> context_of;
  for (const auto& m : model.modules) {
    context_of[m.id] = m.context;
    g.nodes.insert(m.context);
  }
  for (const auto& e : model.edges) {
    auto from = context_of.find(e.from);
    auto to = context_of.find(e.to);
    if (from == context_of.end() || to == context_of.end()) continue;
    if (from->second == to->second) continue;  // intra-context
    g.edges[{from->second, to->second}] += weighted ? e.weight : 1;
  }
  return g;
}

std::vector<CouplingScore> coupling_scores(const ContextGraph& graph) {
  std::map<std::string, CouplingScore> by_context;
  for (const auto& node : graph.nodes) {
    by_context[node] = CouplingScore{node, 0, 0, 0};
  }
  for (const auto& [key, weight] : graph.edges) {
    by_context[key.first].out_degree += weight;
    by_context[key.second].in_degree += weight;
  }
  std::vector<CouplingScore> out;
  out.reserve(by_context.size());
  for (auto& [node, score] : by_context) {
    score.total = score.in_degree + score.out_degree;
    out.push_back(score);
  }
  return out;
}

std::vector<std::string> rank_candidates(const ContextGraph& graph) {
  std::vector<CouplingScore> scores = coupling_scores(graph);
  std::stable_sort(scores.begin(), scores.end(),
                   [](const CouplingScore& a, const CouplingScore& b) {
                     if (a.total != b.total) return a.total < b.total;
                     return a.context < b.context;
                   });
  std::vector<std::string> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.context);
  return out;
}

ContextProposal infer_contexts(const SystemModel& model, std::uint64_t seed,
                               int threshold) {
  // Union-find over module ids; edges above the threshold merge components.
  std::map<std::string, std::string> parent;
  for (const auto& m : model.modules) parent[m.id] = m.id;

  auto find = [&parent](const std::string& id) {
    std::string cur = id;
    while (parent[cur] != cur) {
      parent[cur] = parent[parent[cur]];
      cur = parent[cur];
    }
    return cur;
  };

  for (const auto& e : model.edges) {
    if (e.weight <= threshold) continue;
    if (parent.find(e.from) == parent.end() ||
        parent.find(e.to) == parent.end()) {
      continue;
    }
    std::string a = find(e.from);
    std::string b = find(e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  // Components keyed by their smallest member (union-by-min above makes the
  // root the smallest id); label in order of that representative.
  std::map<std::string, std::vector<std::string>> components;
  for (const auto& m : model.modules) components[find(m.id)].push_back(m.id);

  ContextProposal proposal;
  proposal.seed = seed;
  int next = 1;
  for (const auto& [root, members] : components) {
    std::string label = "ctx-" + std::to_string(next++);
    for (const auto& id : members) proposal.labels[id] = label;
  }
  return proposal;
}

}  // namespace stranglerkit

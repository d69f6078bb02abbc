#include "mutrank/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mutrank/rng.hpp"

namespace mutrank::reduce {

KillMatrix sample_uniform(const KillMatrix& km, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0))
    throw std::invalid_argument("sampling rate must lie in (0, 1]");
  std::size_t n = km.mutant_count();
  auto retained = static_cast<std::size_t>(
      std::floor(rate * static_cast<double>(n) + 0.5));
  rng::Engine eng(seed);
  std::vector<std::size_t> keep = rng::sample_without_replacement(eng, n, retained);
  return select_mutants(km, keep);
}

KillMatrix sample_stratified(const KillMatrix& km, int cap_n, std::uint64_t seed) {
  if (cap_n < 1) throw std::invalid_argument("stratified cap must be >= 1");
  rng::Engine eng(seed);
  std::vector<std::size_t> keep;
  for (const auto& [method, indices] : km.by_method()) {
    if (indices.size() <= static_cast<std::size_t>(cap_n)) {
      keep.insert(keep.end(), indices.begin(), indices.end());
    } else {
      for (std::size_t pos : rng::sample_without_replacement(
               eng, indices.size(), static_cast<std::size_t>(cap_n)))
        keep.push_back(indices[pos]);
    }
  }
  std::sort(keep.begin(), keep.end());
  return select_mutants(km, keep);
}

KillMatrix apply_sampling(const KillMatrix& km, const SamplingSpec& spec) {
  return spec.kind == SamplingSpec::Kind::Uniform
             ? sample_uniform(km, spec.rate, spec.seed)
             : sample_stratified(km, spec.cap_n, spec.seed);
}

KillMatrix filter_kill_reason(const KillMatrix& km, KillReason keep) {
  std::vector<Mutant> mutants;
  mutants.reserve(km.mutant_count());
  for (const Mutant& m : km.mutants()) {
    Mutant filtered{m.id, m.method, TestSet(km.test_count()), {}};
    for (const auto& [col, reason] : m.reasons) {
      if (reason == keep) {
        filtered.kills.set(col);
        filtered.reasons.emplace(col, reason);
      }
    }
    mutants.push_back(std::move(filtered));
  }
  return KillMatrix(km.tests(), std::move(mutants));
}

SubsumptionGraph build_subsumption_graph(const KillMatrix& km) {
  SubsumptionGraph graph;
  std::map<TestSet, std::size_t> node_of;
  for (std::size_t i = 0; i < km.mutant_count(); ++i) {
    const TestSet& kills = km.mutants()[i].kills;
    if (kills.empty()) continue;
    auto [it, inserted] = node_of.try_emplace(kills, graph.nodes.size());
    if (inserted) graph.nodes.push_back({kills, {}});
    graph.nodes[it->second].mutants.push_back(i);
  }

  std::vector<bool> subsumed(graph.nodes.size(), false);
  for (std::size_t a = 0; a < graph.nodes.size(); ++a) {
    for (std::size_t b = 0; b < graph.nodes.size(); ++b) {
      if (a == b) continue;
      if (graph.nodes[a].kills.is_strict_subset_of(graph.nodes[b].kills)) {
        graph.edges.emplace_back(a, b);
        subsumed[b] = true;
      }
    }
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (!subsumed[i]) graph.most_subsuming.push_back(i);
  return graph;
}

KillMatrix keep_most_subsuming(const KillMatrix& km, bool dedup_indistinguishable) {
  SubsumptionGraph graph = build_subsumption_graph(km);
  std::vector<std::size_t> keep;
  for (std::size_t node : graph.most_subsuming) {
    const auto& members = graph.nodes[node].mutants;
    if (dedup_indistinguishable)
      keep.push_back(members.front());
    else
      keep.insert(keep.end(), members.begin(), members.end());
  }
  std::sort(keep.begin(), keep.end());
  return select_mutants(km, keep);
}

std::string subsumption_graph_to_dot(const SubsumptionGraph& graph, const KillMatrix& km) {
  std::string out = "digraph subsumption {\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    out += "  n" + std::to_string(i) + " [label=\"";
    const auto& members = graph.nodes[i].mutants;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j > 0) out += ",";
      out += km.mutants()[members[j]].id;
    }
    out += "\"";
    if (std::find(graph.most_subsuming.begin(), graph.most_subsuming.end(), i) !=
        graph.most_subsuming.end())
      out += " style=bold";
    out += "];\n";
  }
  for (const auto& [a, b] : graph.edges)
    out += "  n" + std::to_string(a) + " -> n" + std::to_string(b) + ";\n";
  out += "}\n";
  return out;
}

}  // namespace mutrank::reduce

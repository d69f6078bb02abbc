#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mutrank/corpus.hpp"

namespace mutrank::reduce {

struct SamplingSpec {
  enum class Kind { Uniform, Stratified };
  Kind kind = Kind::Uniform;
  double rate = 1.0;  // uniform: fraction retained, in (0, 1]
  int cap_n = 1;      // stratified: per-method mutant cap, >= 1
  std::uint64_t seed = 0;
};

// Retains round-half-up(rate * |mutants|) mutants, uniformly without
// replacement, keeping matrix row order. rate outside (0, 1] throws
// std::invalid_argument.
KillMatrix sample_uniform(const KillMatrix& km, double rate, std::uint64_t seed);

// Per method: keeps all mutants when the bucket is within cap_n, otherwise
// exactly cap_n chosen uniformly. cap_n < 1 throws std::invalid_argument.
KillMatrix sample_stratified(const KillMatrix& km, int cap_n, std::uint64_t seed);

KillMatrix apply_sampling(const KillMatrix& km, const SamplingSpec& spec);

// Drops kill-set entries whose recorded reason differs from keep. Mutant
// rows stay (possibly with emptied kill sets) so per-method mutant counts
// remain comparable across filters.
KillMatrix filter_kill_reason(const KillMatrix& km, KillReason keep);

// Dynamic subsumption over killed mutants: one node per distinct kill set
// (indistinguishable mutants share a node), an edge A -> B when A's kill
// set is a strict subset of B's (killing A implies killing B), and the
// sources of that DAG as the most-subsuming frontier.
struct SubsumptionGraph {
  struct Node {
    TestSet kills;
    std::vector<std::size_t> mutants;  // row indices into the source matrix
  };
  std::vector<Node> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (subsumer, subsumed)
  std::vector<std::size_t> most_subsuming;                 // node indices
};

SubsumptionGraph build_subsumption_graph(const KillMatrix& km);

// Keeps exactly the mutants of most-subsuming nodes; surviving mutants are
// dropped. With dedup_indistinguishable, only the first mutant of each
// retained node survives.
KillMatrix keep_most_subsuming(const KillMatrix& km, bool dedup_indistinguishable = false);

std::string subsumption_graph_to_dot(const SubsumptionGraph& graph, const KillMatrix& km);

}  // namespace mutrank::reduce

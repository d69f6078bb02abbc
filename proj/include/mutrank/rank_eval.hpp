#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "mutrank/corpus.hpp"

namespace mutrank::eval {

struct RankedMethod {
  MethodId method;
  Score score;
  std::size_t rank;  // 1-based; ties share the rank of the group's last slot
};

struct Ranking {
  std::vector<RankedMethod> entries;  // score-descending, ties by method name
  std::optional<std::size_t> rank_of(const MethodId& method) const;
};

// Max tie-break: every member of a tie group gets the group's worst (largest)
// position, so a fault tied with others is charged for inspecting them all.
Ranking rank(const ScoreVector& scores);

class GroundTruth {
 public:
  explicit GroundTruth(std::set<MethodId> faulty_methods);
  const std::set<MethodId>& faulty_methods() const { return faulty_methods_; }

 private:
  std::set<MethodId> faulty_methods_;
};

GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

// Smallest rank over the fault's methods; nullopt when none is ranked.
std::optional<std::size_t> best_faulty_rank(const Ranking& ranking, const GroundTruth& truth);

using FaultResult = std::pair<Ranking, GroundTruth>;

// Number of faults whose best-ranked faulty method sits within the top n.
std::size_t acc_at_n(const std::vector<FaultResult>& results, std::size_t n);

// Methods inspected before reaching the fault: best faulty rank - 1, or the
// full ranking length when no faulty method is ranked.
std::size_t wef(const Ranking& ranking, const GroundTruth& truth);

double average_precision(const Ranking& ranking, const GroundTruth& truth);
double mean_average_precision(const std::vector<FaultResult>& results);

struct EvalReport {
  std::size_t n_faults = 0;
  std::map<std::size_t, std::size_t> acc;  // n -> faults located in top n
  std::vector<std::size_t> wef_per_fault;
  double map_score = 0.0;
};

EvalReport evaluate(const std::vector<FaultResult>& results,
                    const std::vector<std::size_t>& ns = {1, 3, 5, 10});

}  // namespace mutrank::eval

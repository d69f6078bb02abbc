#include "mutrank/rank_eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mutrank::eval {

Ranking rank(const ScoreVector& scores) {
  Ranking out;
  out.entries.reserve(scores.size());
  for (const auto& [method, score] : scores)
    out.entries.push_back(RankedMethod{method, score, 0});
  // ScoreVector iterates methods in lexicographic order; a stable sort on the
  // score alone keeps that order inside tie groups.
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedMethod& a, const RankedMethod& b) {
                     return b.score < a.score;
                   });
  std::size_t i = 0;
  while (i < out.entries.size()) {
    std::size_t j = i;
    while (j < out.entries.size() && out.entries[j].score == out.entries[i].score) ++j;
    for (std::size_t k = i; k < j; ++k) out.entries[k].rank = j;
    i = j;
  }
  return out;
}

std::optional<std::size_t> Ranking::rank_of(const MethodId& method) const {
  for (const RankedMethod& e : entries)
    if (e.method == method) return e.rank;
  return std::nullopt;
}

GroundTruth::GroundTruth(std::set<MethodId> faulty_methods)
    : faulty_methods_(std::move(faulty_methods)) {
  if (faulty_methods_.empty())
    throw ValidationError("ground truth needs at least one faulty method");
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path.string());
  if (!j.is_object() || !j.contains("faulty_methods") || !j["faulty_methods"].is_array())
    throw ParseError(path.string() + ": expected an object with a 'faulty_methods' array");
  std::set<MethodId> methods;
  for (const auto& v : j["faulty_methods"]) {
    if (!v.is_string())
      throw ParseError(path.string() + ": 'faulty_methods' entries must be strings");
    methods.insert(MethodId{v.get<std::string>()});
  }
  return GroundTruth(std::move(methods));
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  nlohmann::json j;
  j["faulty_methods"] = nlohmann::json::array();
  for (const MethodId& m : truth.faulty_methods())
    j["faulty_methods"].push_back(m.qualified_name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::optional<std::size_t> best_faulty_rank(const Ranking& ranking, const GroundTruth& truth) {
  std::optional<std::size_t> best;
  for (const MethodId& m : truth.faulty_methods()) {
    auto r = ranking.rank_of(m);
    if (r && (!best || *r < *best)) best = r;
  }
  return best;
}

std::size_t acc_at_n(const std::vector<FaultResult>& results, std::size_t n) {
  std::size_t count = 0;
  for (const auto& [ranking, truth] : results) {
    auto best = best_faulty_rank(ranking, truth);
    if (best && *best <= n) ++count;
  }
  return count;
}

std::size_t wef(const Ranking& ranking, const GroundTruth& truth) {
  auto best = best_faulty_rank(ranking, truth);
  return best ? *best - 1 : ranking.entries.size();
}

double average_precision(const Ranking& ranking, const GroundTruth& truth) {
  std::vector<std::size_t> ranks;
  for (const MethodId& m : truth.faulty_methods()) {
    auto r = ranking.rank_of(m);
    if (r) ranks.push_back(*r);
  }
  std::sort(ranks.begin(), ranks.end());
  double ap = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    ap += static_cast<double>(i + 1) / static_cast<double>(ranks[i]);
  return ap / static_cast<double>(truth.faulty_methods().size());
}

double mean_average_precision(const std::vector<FaultResult>& results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [ranking, truth] : results) sum += average_precision(ranking, truth);
  return sum / static_cast<double>(results.size());
}

EvalReport evaluate(const std::vector<FaultResult>& results,
                    const std::vector<std::size_t>& ns) {
  EvalReport report;
  report.n_faults = results.size();
  for (std::size_t n : ns) report.acc[n] = acc_at_n(results, n);
  for (const auto& [ranking, truth] : results)
    report.wef_per_fault.push_back(wef(ranking, truth));
  report.map_score = mean_average_precision(results);
  return report;
}

}  // namespace mutrank::eval

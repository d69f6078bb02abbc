#include "mutrank/coupling.hpp"

namespace mutrank::coupling {

CouplingScore pc(const Mutant& m, const TestSet& failing) {
  std::size_t killers = m.kills.count();
  if (killers == 0) return Rational(0);
  if (m.kills.is_subset_of(failing)) return Rational(1);
  std::size_t overlap = m.kills.intersection_count(failing);
  if (overlap == 0) return Rational(0);
  return Rational(static_cast<std::int64_t>(overlap), static_cast<std::int64_t>(killers));
}

CouplingScore pc(const KillMatrix& km, const Mutant& m, const FailureSnapshot& snap) {
  return pc(m, resolve_snapshot(km, snap).failing);
}

ScoreVector score_pc_fp(const KillMatrix& km, const FailureSnapshot& snap) {
  TestSet failing = resolve_snapshot(km, snap).failing;
  ScoreVector out;
  for (const auto& [method, indices] : km.by_method()) {
    Rational sum(0);
    for (std::size_t i : indices) sum += pc(km.mutants()[i], failing);
    out.emplace(method, Score::exact(sum));
  }
  return out;
}

}  // namespace mutrank::coupling

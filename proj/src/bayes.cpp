#include "mutrank/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mutrank::bayes {

namespace {

// Applies fn(method, mutant indices) over the by-method index and collects
// the per-method scores.
template <typename Fn>
ScoreVector per_method(const KillMatrix& km, Fn&& fn) {
  ScoreVector out;
  for (const auto& [method, indices] : km.by_method())
    out.emplace(method, fn(indices));
  return out;
}

std::int64_t kill_count_on(const KillMatrix& km, const std::vector<std::size_t>& indices,
                           std::size_t col) {
  std::int64_t n = 0;
  for (std::size_t i : indices)
    if (km.mutants()[i].kills.test(col)) ++n;
  return n;
}

// |{m : m's kill bit on t matches the snapshot outcome of t}| for one method.
std::int64_t agree_count_on(const KillMatrix& km, const std::vector<std::size_t>& indices,
                            std::size_t col, bool failing) {
  std::int64_t n = 0;
  for (std::size_t i : indices)
    if (km.mutants()[i].kills.test(col) == failing) ++n;
  return n;
}

// Summing the log terms smallest-first makes the result a function of the
// term multiset, so methods with permuted per-test counts score identically
// down to the last bit and tie cleanly at ranking time.
double log_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace

ScoreVector score_em_f(const KillMatrix& km, const FailureSnapshot& snap) {
  SnapshotView view = resolve_snapshot(km, snap);
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::int64_t n = 0;
    for (std::size_t i : indices)
      if (km.mutants()[i].kills == view.failing) ++n;
    return Score::count(n);
  });
}

ScoreVector score_em_fp(const KillMatrix& km, const FailureSnapshot& snap) {
  SnapshotView view = resolve_snapshot(km, snap);
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::int64_t n = 0;
    for (std::size_t i : indices) {
      const TestSet& kills = km.mutants()[i].kills;
      if (kills == view.failing && !kills.intersects(view.passing)) ++n;
    }
    return Score::count(n);
  });
}

ScoreVector score_pm_mult_f(const KillMatrix& km, const FailureSnapshot& snap, Epsilon eps) {
  SnapshotView view = resolve_snapshot(km, snap);
  std::vector<std::size_t> failing_cols = view.failing.bits();
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::vector<double> terms;
    terms.reserve(failing_cols.size());
    for (std::size_t col : failing_cols)
      terms.push_back(
          std::log(static_cast<double>(kill_count_on(km, indices, col)) + eps.value));
    return Score::real(log_sum(terms));
  });
}

ScoreVector score_pm_add_f(const KillMatrix& km, const FailureSnapshot& snap) {
  SnapshotView view = resolve_snapshot(km, snap);
  std::vector<std::size_t> failing_cols = view.failing.bits();
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::int64_t sum = 0;
    for (std::size_t col : failing_cols) sum += kill_count_on(km, indices, col);
    return Score::count(sum);
  });
}

ScoreVector score_pm_mult_fp(const KillMatrix& km, const FailureSnapshot& snap, Epsilon eps) {
  SnapshotView view = resolve_snapshot(km, snap);
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::vector<double> terms;
    for (std::size_t col = 0; col < km.test_count(); ++col) {
      bool failing = view.failing.test(col);
      if (!failing && !view.passing.test(col)) continue;
      terms.push_back(
          std::log(static_cast<double>(agree_count_on(km, indices, col, failing)) + eps.value));
    }
    return Score::real(log_sum(terms));
  });
}

ScoreVector score_pm_add_fp(const KillMatrix& km, const FailureSnapshot& snap) {
  SnapshotView view = resolve_snapshot(km, snap);
  return per_method(km, [&](const std::vector<std::size_t>& indices) {
    std::int64_t sum = 0;
    for (std::size_t col = 0; col < km.test_count(); ++col) {
      bool failing = view.failing.test(col);
      if (!failing && !view.passing.test(col)) continue;
      sum += agree_count_on(km, indices, col, failing);
    }
    return Score::count(sum);
  });
}

}  // namespace mutrank::bayes

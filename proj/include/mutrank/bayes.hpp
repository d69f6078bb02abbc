#pragma once

#include <stdexcept>

#include "mutrank/corpus.hpp"

namespace mutrank::bayes {

// Smoothing constant for the multiplicative models; keeps a method with a
// zero count on some test from collapsing the whole product.
struct Epsilon {
  double value = 1e-4;
  Epsilon() = default;
  explicit Epsilon(double v) : value(v) {
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
};

// Suspiciousness per method from mutant kill counts. The _f variants look
// at failing tests only; the _fp variants also reward consistency with the
// passing set. em_* count exact kill-set matches, pm_* accumulate per-test
// evidence (multiplicatively in log domain, or additively).
// Every returned map has exactly one entry per method of the matrix.
ScoreVector score_em_f(const KillMatrix& km, const FailureSnapshot& snap);
ScoreVector score_em_fp(const KillMatrix& km, const FailureSnapshot& snap);
ScoreVector score_pm_mult_f(const KillMatrix& km, const FailureSnapshot& snap,
                            Epsilon eps = {});
ScoreVector score_pm_add_f(const KillMatrix& km, const FailureSnapshot& snap);
ScoreVector score_pm_mult_fp(const KillMatrix& km, const FailureSnapshot& snap,
                             Epsilon eps = {});
ScoreVector score_pm_add_fp(const KillMatrix& km, const FailureSnapshot& snap);

}  // namespace mutrank::bayes

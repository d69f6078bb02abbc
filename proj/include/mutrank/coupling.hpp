#pragma once

#include "mutrank/corpus.hpp"
#include "mutrank/rational.hpp"

namespace mutrank::coupling {

// pc values are exact rationals in [0, 1].
using CouplingScore = Rational;

// Fraction of a mutant's killing tests that are failing tests: 1 when every
// killer fails (and at least one test kills), the overlap ratio when killers
// are split, 0 when no overlap. A never-killed mutant scores 0, not 1; the
// vacuous-subset reading would credit methods for their surviving mutants.
CouplingScore pc(const Mutant& m, const TestSet& failing);
CouplingScore pc(const KillMatrix& km, const Mutant& m, const FailureSnapshot& snap);

// score(e) = sum of pc over e's mutants, kept exact until ranking.
ScoreVector score_pc_fp(const KillMatrix& km, const FailureSnapshot& snap);

}  // namespace mutrank::coupling

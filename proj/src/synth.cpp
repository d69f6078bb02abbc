#include "mutrank/synth.hpp"

#include <stdexcept>
#include <string>

#include "mutrank/rng.hpp"

namespace mutrank::synth {

namespace {

std::string padded(const char* prefix, int i, int width) {
  std::string digits = std::to_string(i);
  std::string out = prefix;
  for (int k = static_cast<int>(digits.size()); k < width; ++k) out += '0';
  return out + digits;
}

KillReason draw_reason(rng::Engine& eng, const ReasonWeights& w) {
  double total = w.assertion + w.timeout + w.exception;
  double u = eng.unit() * total;
  if (u < w.assertion) return KillReason::Assertion;
  if (u < w.assertion + w.timeout) return KillReason::Timeout;
  return KillReason::Exception;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n_methods < 1) throw std::invalid_argument("n_methods must be >= 1");
  if (spec.mutants_per_method_min < 1 ||
      spec.mutants_per_method_max < spec.mutants_per_method_min)
    throw std::invalid_argument("mutants_per_method range is invalid");
  if (spec.n_tests < 1) throw std::invalid_argument("n_tests must be >= 1");
  if (spec.n_failing < 1 || spec.n_failing > spec.n_tests)
    throw std::invalid_argument("n_failing must lie in [1, n_tests]");
  if (!(spec.coupling >= 0.0 && spec.coupling <= 1.0))
    throw std::invalid_argument("coupling must lie in [0, 1]");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0))
    throw std::invalid_argument("noise must lie in [0, 1]");
  if (spec.reasons.assertion < 0.0 || spec.reasons.timeout < 0.0 ||
      spec.reasons.exception < 0.0 ||
      spec.reasons.assertion + spec.reasons.timeout + spec.reasons.exception <= 0.0)
    throw std::invalid_argument("kill-reason weights must be non-negative and sum > 0");
}

SynthResult generate(const SynthSpec& spec) {
  validate(spec);
  rng::Engine eng(spec.seed);

  std::vector<TestId> tests;
  tests.reserve(static_cast<std::size_t>(spec.n_tests));
  for (int t = 0; t < spec.n_tests; ++t) tests.push_back(TestId{padded("test_", t, 3)});

  auto faulty = static_cast<int>(eng.below(static_cast<std::uint64_t>(spec.n_methods)));

  std::vector<std::size_t> failing_cols = rng::sample_without_replacement(
      eng, static_cast<std::size_t>(spec.n_tests), static_cast<std::size_t>(spec.n_failing));
  TestSet failing(tests.size());
  for (std::size_t c : failing_cols) failing.set(c);

  std::vector<Mutant> mutants;
  int mutant_counter = 0;
  int span = spec.mutants_per_method_max - spec.mutants_per_method_min + 1;
  for (int e = 0; e < spec.n_methods; ++e) {
    MethodId method{padded("syn.App#method_", e, 3)};
    int count = spec.mutants_per_method_min +
                static_cast<int>(eng.below(static_cast<std::uint64_t>(span)));
    for (int k = 0; k < count; ++k) {
      Mutant m{padded("mut_", mutant_counter++, 4), method, TestSet(tests.size()), {}};
      for (std::size_t c = 0; c < tests.size(); ++c) {
        double p = (e == faulty && failing.test(c)) ? spec.coupling : spec.noise;
        if (eng.unit() < p) {
          m.kills.set(c);
          m.reasons.emplace(static_cast<std::uint32_t>(c), draw_reason(eng, spec.reasons));
        }
      }
      mutants.push_back(std::move(m));
    }
  }

  std::set<TestId> failing_set, passing_set;
  for (std::size_t c = 0; c < tests.size(); ++c)
    (failing.test(c) ? failing_set : passing_set).insert(tests[c]);

  std::set<MethodId> covered;
  for (int e = 0; e < spec.n_methods; ++e) covered.insert(MethodId{padded("syn.App#method_", e, 3)});

  KillMatrix matrix(std::move(tests), std::move(mutants));
  FailureSnapshot snapshot(std::move(failing_set), std::move(passing_set), std::move(covered));
  eval::GroundTruth truth({MethodId{padded("syn.App#method_", faulty, 3)}});
  return SynthResult{std::move(matrix), std::move(snapshot), std::move(truth)};
}

void write_fault_dir(const SynthResult& result, const std::filesystem::path& dir,
                     MatrixFormat format) {
  std::filesystem::create_directories(dir);
  save_kill_matrix(result.matrix,
                   dir / (format == MatrixFormat::Csv ? "matrix.csv" : "matrix.json"), format);
  save_failure_snapshot(result.snapshot, dir / "snapshot.json");
  eval::save_ground_truth(result.truth, dir / "truth.json");
}

}  // namespace mutrank::synth

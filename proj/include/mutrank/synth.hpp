#pragma once

#include <cstdint>
#include <filesystem>

#include "mutrank/corpus.hpp"
#include "mutrank/rank_eval.hpp"

namespace mutrank::synth {

struct ReasonWeights {
  double assertion = 0.7;
  double timeout = 0.1;
  double exception = 0.2;
};

struct SynthSpec {
  int n_methods = 1;
  int mutants_per_method_min = 1;
  int mutants_per_method_max = 1;
  int n_tests = 1;
  int n_failing = 1;
  // Probability that a failing test kills a faulty-method mutant.
  double coupling = 1.0;
  // Probability of any other (test, mutant) kill.
  double noise = 0.0;
  std::uint64_t seed = 0;
  ReasonWeights reasons{};
};

void validate(const SynthSpec& spec);  // throws std::invalid_argument

struct SynthResult {
  KillMatrix matrix;
  FailureSnapshot snapshot;  // coverage = all methods
  eval::GroundTruth truth;   // the one planted faulty method
};

// Deterministic per seed: plants a fault in one uniformly chosen method and
// draws the kill matrix cell-by-cell from coupling/noise probabilities.
SynthResult generate(const SynthSpec& spec);

// Writes matrix.(csv|json), snapshot.json, and truth.json into dir.
void write_fault_dir(const SynthResult& result, const std::filesystem::path& dir,
                     MatrixFormat format);

}  // namespace mutrank::synth

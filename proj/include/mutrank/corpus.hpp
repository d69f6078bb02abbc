#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mutrank/score.hpp"

namespace mutrank {

class CorpusError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed input file (bad CSV/JSON shape, unknown enum value, ...).
class ParseError : public CorpusError {
  using CorpusError::CorpusError;
};
// Structurally well-formed input that breaks a data invariant.
class ValidationError : public CorpusError {
  using CorpusError::CorpusError;
};
class EmptyCorpus : public CorpusError {
  using CorpusError::CorpusError;
};
class EmptyFailing : public CorpusError {
  using CorpusError::CorpusError;
};
class NoCoverage : public CorpusError {
  using CorpusError::CorpusError;
};

struct TestId {
  std::string name;
  auto operator<=>(const TestId&) const = default;
};

struct MethodId {
  std::string qualified_name;
  auto operator<=>(const MethodId&) const = default;
};

using ScoreVector = std::map<MethodId, Score>;

enum class KillReason { Assertion, Timeout, Exception };

std::string_view to_string(KillReason r);
std::optional<KillReason> kill_reason_from_string(std::string_view s);

// Set of test columns over a fixed-width test universe (one bit per column
// of the enclosing matrix). Width mismatches in set operations are bugs and
// are asserted, not recovered from.
class TestSet {
 public:
  TestSet() = default;
  explicit TestSet(std::size_t width)
      : width_(width), words_((width + 63) / 64, 0) {}

  std::size_t width() const { return width_; }
  bool test(std::size_t i) const {
    return (words_[i / 64] >> (i % 64)) & 1u;
  }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  bool is_subset_of(const TestSet& o) const;
  bool is_strict_subset_of(const TestSet& o) const {
    return is_subset_of(o) && words_ != o.words_;
  }
  bool intersects(const TestSet& o) const;
  std::size_t intersection_count(const TestSet& o) const;

  std::vector<std::size_t> bits() const;  // set bits, ascending

  friend bool operator==(const TestSet& a, const TestSet& b) {
    return a.width_ == b.width_ && a.words_ == b.words_;
  }
  friend bool operator<(const TestSet& a, const TestSet& b) {
    return a.words_ < b.words_;  // only meaningful within one universe
  }

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

struct Mutant {
  std::string id;
  MethodId method;
  TestSet kills;                                // columns of the enclosing matrix
  std::map<std::uint32_t, KillReason> reasons;  // keyed by column; keys == kills bits
};

// Immutable kill matrix: test columns, mutant rows, and a per-method row
// index. The constructor validates every structural invariant, so any
// KillMatrix in flight is well-formed.
class KillMatrix {
 public:
  KillMatrix(std::vector<TestId> tests, std::vector<Mutant> mutants);

  const std::vector<TestId>& tests() const { return tests_; }
  const std::vector<Mutant>& mutants() const { return mutants_; }
  const std::map<MethodId, std::vector<std::size_t>>& by_method() const {
    return by_method_;
  }

  std::size_t test_count() const { return tests_.size(); }
  std::size_t mutant_count() const { return mutants_.size(); }

  std::optional<std::uint32_t> column_of(std::string_view test_name) const;
  std::vector<TestId> kill_set_of(std::size_t mutant_index) const;

  friend bool operator==(const KillMatrix& a, const KillMatrix& b);

 private:
  std::vector<TestId> tests_;
  std::vector<Mutant> mutants_;
  std::unordered_map<std::string, std::uint32_t> columns_;
  std::map<MethodId, std::vector<std::size_t>> by_method_;
};

// Outcome snapshot of the failing run: which tests fail, which pass, and
// (optionally) which methods the failing tests cover.
class FailureSnapshot {
 public:
  FailureSnapshot(std::set<TestId> failing, std::set<TestId> passing,
                  std::optional<std::set<MethodId>> covered_methods = std::nullopt);

  const std::set<TestId>& failing() const { return failing_; }
  const std::set<TestId>& passing() const { return passing_; }
  const std::optional<std::set<MethodId>>& covered_methods() const {
    return covered_methods_;
  }

 private:
  std::set<TestId> failing_;
  std::set<TestId> passing_;
  std::optional<std::set<MethodId>> covered_methods_;
};

// Snapshot resolved to matrix columns.
struct SnapshotView {
  TestSet failing;
  TestSet passing;
};

// Throws ValidationError if the snapshot names a test the matrix lacks.
SnapshotView resolve_snapshot(const KillMatrix& km, const FailureSnapshot& snap);

enum class MatrixFormat { Csv, Json };

// CSV matrices read the test universe from a sibling tests.txt (one test
// name per line, canonical column order); the JSON form is self-contained.
KillMatrix load_kill_matrix(const std::filesystem::path& path, MatrixFormat format);
KillMatrix load_kill_matrix_csv(const std::filesystem::path& csv_path,
                                const std::filesystem::path& tests_path);
void save_kill_matrix(const KillMatrix& km, const std::filesystem::path& path,
                      MatrixFormat format);
void save_kill_matrix_csv(const KillMatrix& km, const std::filesystem::path& csv_path,
                          const std::filesystem::path& tests_path);

FailureSnapshot load_failure_snapshot(const std::filesystem::path& path);
void save_failure_snapshot(const FailureSnapshot& snap, const std::filesystem::path& path);

// Keeps only mutants whose method is in snap.covered_methods; throws
// NoCoverage when the snapshot carries no coverage set.
KillMatrix restrict_to_coverage(const KillMatrix& km, const FailureSnapshot& snap);

// Row filter: keeps the mutants at the given (ascending) indices.
KillMatrix select_mutants(const KillMatrix& km, const std::vector<std::size_t>& keep);

}  // namespace mutrank

#pragma once

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <string>

#include "mutrank/corpus.hpp"

namespace fixtures {

inline mutrank::TestSet bits(std::size_t width, std::initializer_list<std::size_t> cols) {
  mutrank::TestSet s(width);
  for (std::size_t c : cols) s.set(c);
  return s;
}

inline mutrank::Mutant mutant(std::string id, std::string method, std::size_t width,
                              std::initializer_list<std::size_t> kills,
                              mutrank::KillReason reason = mutrank::KillReason::Assertion) {
  mutrank::Mutant m{std::move(id), mutrank::MethodId{std::move(method)},
                    bits(width, kills), {}};
  for (std::size_t c : kills) m.reasons.emplace(static_cast<std::uint32_t>(c), reason);
  return m;
}

inline const std::string kGetType = "com.acme.Foo#getType";
inline const std::string kResolveType = "com.acme.Foo#resolveType";

// Two-method, four-test worked example used throughout the tests:
//            t1  t2  t3  t4
//   m1 (g)    x   x
//   m2 (g)            x
//   m3 (g)        x   x
//   m5 (r)        x
//   m6 (r)    x   x   x
inline mutrank::KillMatrix fixture_matrix() {
  std::vector<mutrank::TestId> tests{{"t1"}, {"t2"}, {"t3"}, {"t4"}};
  std::vector<mutrank::Mutant> mutants;
  mutants.push_back(mutant("m1", kGetType, 4, {0, 1}));
  mutants.push_back(mutant("m2", kGetType, 4, {2}));
  mutants.push_back(mutant("m3", kGetType, 4, {1, 2}));
  mutants.push_back(mutant("m5", kResolveType, 4, {1}));
  mutants.push_back(mutant("m6", kResolveType, 4, {0, 1, 2}));
  return mutrank::KillMatrix(std::move(tests), std::move(mutants));
}

inline mutrank::FailureSnapshot snap(std::initializer_list<std::string> failing,
                                     std::initializer_list<std::string> passing = {}) {
  std::set<mutrank::TestId> f, p;
  for (const std::string& t : failing) f.insert(mutrank::TestId{t});
  for (const std::string& t : passing) p.insert(mutrank::TestId{t});
  return mutrank::FailureSnapshot(std::move(f), std::move(p));
}

inline mutrank::FailureSnapshot snap_covered(std::initializer_list<std::string> failing,
                                             std::initializer_list<std::string> passing,
                                             std::initializer_list<std::string> covered) {
  std::set<mutrank::TestId> f, p;
  std::set<mutrank::MethodId> c;
  for (const std::string& t : failing) f.insert(mutrank::TestId{t});
  for (const std::string& t : passing) p.insert(mutrank::TestId{t});
  for (const std::string& m : covered) c.insert(mutrank::MethodId{m});
  return mutrank::FailureSnapshot(std::move(f), std::move(p), std::move(c));
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& hint) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mutrank_" + hint + "_" + std::to_string(counter++) + "_" +
             std::to_string(static_cast<unsigned>(
                 reinterpret_cast<std::uintptr_t>(this) & 0xffffu)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

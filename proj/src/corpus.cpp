#include "mutrank/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mutrank {

namespace {

using nlohmann::json;

void check_identifier(std::string_view id, std::string_view what) {
  if (id.empty()) throw ValidationError(std::string(what) + " must be non-empty");
  if (id.find_first_of(",\"\n\r") != std::string_view::npos)
    throw ValidationError(std::string(what) + " '" + std::string(id) +
                          "' contains a delimiter character");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << data;
  if (!out) throw ParseError("write failed for " + path.string());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

std::vector<std::string> split_csv_row(const std::string& line, std::size_t lineno) {
  if (line.find('"') != std::string::npos)
    throw ParseError("line " + std::to_string(lineno) + ": quoted fields are not supported");
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

json parse_json_file(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path.string());
  return j;
}

std::set<TestId> test_set_from_json(const json& arr, const char* what,
                                    const std::filesystem::path& path) {
  if (!arr.is_array())
    throw ParseError(path.string() + ": '" + what + "' must be an array");
  std::set<TestId> out;
  for (const auto& v : arr) {
    if (!v.is_string())
      throw ParseError(path.string() + ": '" + what + "' entries must be strings");
    auto [it, inserted] = out.insert(TestId{v.get<std::string>()});
    if (!inserted)
      throw ValidationError(path.string() + ": duplicate test '" + it->name +
                            "' in '" + what + "'");
  }
  return out;
}

}  // namespace

std::string_view to_string(KillReason r) {
  switch (r) {
    case KillReason::Assertion: return "ASSERTION";
    case KillReason::Timeout: return "TIMEOUT";
    case KillReason::Exception: return "EXCEPTION";
  }
  return "ASSERTION";
}

std::optional<KillReason> kill_reason_from_string(std::string_view s) {
  if (s == "ASSERTION") return KillReason::Assertion;
  if (s == "TIMEOUT") return KillReason::Timeout;
  if (s == "EXCEPTION") return KillReason::Exception;
  return std::nullopt;
}

std::size_t TestSet::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool TestSet::is_subset_of(const TestSet& o) const {
  assert(width_ == o.width_);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~o.words_[i]) return false;
  return true;
}

bool TestSet::intersects(const TestSet& o) const {
  assert(width_ == o.width_);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & o.words_[i]) return true;
  return false;
}

std::size_t TestSet::intersection_count(const TestSet& o) const {
  assert(width_ == o.width_);
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
  return n;
}

std::vector<std::size_t> TestSet::bits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < width_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

KillMatrix::KillMatrix(std::vector<TestId> tests, std::vector<Mutant> mutants)
    : tests_(std::move(tests)), mutants_(std::move(mutants)) {
  columns_.reserve(tests_.size());
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    check_identifier(tests_[i].name, "test id");
    auto [it, inserted] = columns_.emplace(tests_[i].name, static_cast<std::uint32_t>(i));
    if (!inserted)
      throw ValidationError("duplicate test id '" + tests_[i].name + "'");
  }
  std::set<std::string_view> seen_ids;
  for (std::size_t i = 0; i < mutants_.size(); ++i) {
    const Mutant& m = mutants_[i];
    check_identifier(m.id, "mutant id");
    check_identifier(m.method.qualified_name, "method id");
    if (!seen_ids.insert(m.id).second)
      throw ValidationError("duplicate mutant id '" + m.id + "'");
    if (m.kills.width() != tests_.size())
      throw ValidationError("mutant '" + m.id + "' kill set has wrong test universe");
    for (const auto& [col, reason] : m.reasons) {
      (void)reason;
      if (col >= tests_.size() || !m.kills.test(col))
        throw ValidationError("mutant '" + m.id + "' has a kill reason for a test it does not kill");
    }
    if (m.reasons.size() != m.kills.count())
      throw ValidationError("mutant '" + m.id + "' is missing a kill reason");
    by_method_[m.method].push_back(i);
  }
}

std::optional<std::uint32_t> KillMatrix::column_of(std::string_view test_name) const {
  auto it = columns_.find(std::string(test_name));
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

std::vector<TestId> KillMatrix::kill_set_of(std::size_t mutant_index) const {
  std::vector<TestId> out;
  for (std::size_t col : mutants_.at(mutant_index).kills.bits())
    out.push_back(tests_[col]);
  return out;
}

bool operator==(const KillMatrix& a, const KillMatrix& b) {
  if (a.tests_ != b.tests_ || a.mutants_.size() != b.mutants_.size()) return false;
  for (std::size_t i = 0; i < a.mutants_.size(); ++i) {
    const Mutant& x = a.mutants_[i];
    const Mutant& y = b.mutants_[i];
    if (x.id != y.id || x.method != y.method || x.kills != y.kills || x.reasons != y.reasons)
      return false;
  }
  return true;
}

FailureSnapshot::FailureSnapshot(std::set<TestId> failing, std::set<TestId> passing,
                                 std::optional<std::set<MethodId>> covered_methods)
    : failing_(std::move(failing)),
      passing_(std::move(passing)),
      covered_methods_(std::move(covered_methods)) {
  if (failing_.empty()) throw EmptyFailing("snapshot has no failing tests");
  for (const TestId& t : failing_) {
    check_identifier(t.name, "test id");
    if (passing_.count(t))
      throw ValidationError("test '" + t.name + "' is both failing and passing");
  }
  for (const TestId& t : passing_) check_identifier(t.name, "test id");
  if (covered_methods_)
    for (const MethodId& m : *covered_methods_)
      check_identifier(m.qualified_name, "method id");
}

SnapshotView resolve_snapshot(const KillMatrix& km, const FailureSnapshot& snap) {
  SnapshotView view{TestSet(km.test_count()), TestSet(km.test_count())};
  for (const TestId& t : snap.failing()) {
    auto col = km.column_of(t.name);
    if (!col) throw ValidationError("failing test '" + t.name + "' is not in the matrix");
    view.failing.set(*col);
  }
  for (const TestId& t : snap.passing()) {
    auto col = km.column_of(t.name);
    if (!col) throw ValidationError("passing test '" + t.name + "' is not in the matrix");
    view.passing.set(*col);
  }
  return view;
}

KillMatrix load_kill_matrix_csv(const std::filesystem::path& csv_path,
                                const std::filesystem::path& tests_path) {
  std::vector<TestId> tests;
  for (const std::string& line : split_lines(read_file(tests_path))) {
    if (line.empty()) continue;
    tests.push_back(TestId{line});
  }
  if (tests.empty()) throw EmptyCorpus("no tests listed in " + tests_path.string());

  std::unordered_map<std::string, std::uint32_t> columns;
  for (std::size_t i = 0; i < tests.size(); ++i)
    columns.emplace(tests[i].name, static_cast<std::uint32_t>(i));
  if (columns.size() != tests.size())
    throw ValidationError("duplicate test id in " + tests_path.string());

  std::vector<std::string> lines = split_lines(read_file(csv_path));
  if (lines.empty()) throw ParseError(csv_path.string() + " is empty");
  if (lines[0] != "mutant_id,method,test_id,outcome,reason")
    throw ParseError(csv_path.string() + ": unexpected header '" + lines[0] + "'");

  struct Row {
    MethodId method;
    TestSet kills;
    std::map<std::uint32_t, KillReason> reasons;
    std::set<std::uint32_t> seen;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Row> rows;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_row(lines[i], i + 1);
    if (f.size() != 5)
      throw ParseError(csv_path.string() + " line " + std::to_string(i + 1) +
                       ": expected 5 fields, got " + std::to_string(f.size()));
    const std::string& mutant_id = f[0];
    const std::string& method = f[1];
    const std::string& test = f[2];
    const std::string& outcome = f[3];
    const std::string& reason = f[4];

    auto col_it = columns.find(test);
    if (col_it == columns.end())
      throw ValidationError(csv_path.string() + " line " + std::to_string(i + 1) +
                            ": unknown test '" + test + "'");

    auto [row_it, inserted] = rows.try_emplace(mutant_id);
    Row& row = row_it->second;
    if (inserted) {
      order.push_back(mutant_id);
      row.method = MethodId{method};
      row.kills = TestSet(tests.size());
    } else if (row.method.qualified_name != method) {
      throw ValidationError(csv_path.string() + " line " + std::to_string(i + 1) +
                            ": mutant '" + mutant_id + "' maps to two methods");
    }
    if (!row.seen.insert(col_it->second).second)
      throw ValidationError(csv_path.string() + " line " + std::to_string(i + 1) +
                            ": duplicate entry for mutant '" + mutant_id +
                            "' and test '" + test + "'");

    if (outcome == "KILLED") {
      auto parsed = kill_reason_from_string(reason);
      if (!parsed)
        throw ParseError(csv_path.string() + " line " + std::to_string(i + 1) +
                         ": bad kill reason '" + reason + "'");
      row.kills.set(col_it->second);
      row.reasons.emplace(col_it->second, *parsed);
    } else if (outcome == "SURVIVED") {
      if (!reason.empty())
        throw ParseError(csv_path.string() + " line " + std::to_string(i + 1) +
                         ": SURVIVED rows must leave the reason empty");
    } else {
      throw ParseError(csv_path.string() + " line " + std::to_string(i + 1) +
                       ": bad outcome '" + outcome + "'");
    }
  }

  if (order.empty()) throw EmptyCorpus("no mutants in " + csv_path.string());

  std::vector<Mutant> mutants;
  mutants.reserve(order.size());
  for (const std::string& id : order) {
    Row& row = rows.at(id);
    mutants.push_back(Mutant{id, std::move(row.method), std::move(row.kills),
                             std::move(row.reasons)});
  }
  return KillMatrix(std::move(tests), std::move(mutants));
}

static std::filesystem::path sibling_tests_path(const std::filesystem::path& csv_path) {
  return csv_path.parent_path() / "tests.txt";
}

KillMatrix load_kill_matrix(const std::filesystem::path& path, MatrixFormat format) {
  if (format == MatrixFormat::Csv)
    return load_kill_matrix_csv(path, sibling_tests_path(path));

  json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("tests") || !j.contains("mutants"))
    throw ParseError(path.string() + ": expected an object with 'tests' and 'mutants'");
  if (!j["tests"].is_array() || !j["mutants"].is_array())
    throw ParseError(path.string() + ": 'tests' and 'mutants' must be arrays");

  std::vector<TestId> tests;
  for (const auto& t : j["tests"]) {
    if (!t.is_string()) throw ParseError(path.string() + ": test ids must be strings");
    tests.push_back(TestId{t.get<std::string>()});
  }
  if (tests.empty()) throw EmptyCorpus("no tests in " + path.string());
  std::unordered_map<std::string, std::uint32_t> columns;
  for (std::size_t i = 0; i < tests.size(); ++i)
    columns.emplace(tests[i].name, static_cast<std::uint32_t>(i));

  std::vector<Mutant> mutants;
  for (const auto& jm : j["mutants"]) {
    if (!jm.is_object() || !jm.contains("mutant_id") || !jm.contains("method") ||
        !jm.contains("kills"))
      throw ParseError(path.string() + ": mutant entries need 'mutant_id', 'method', 'kills'");
    if (!jm["mutant_id"].is_string() || !jm["method"].is_string() || !jm["kills"].is_array())
      throw ParseError(path.string() + ": malformed mutant entry");
    Mutant m;
    m.id = jm["mutant_id"].get<std::string>();
    m.method = MethodId{jm["method"].get<std::string>()};
    m.kills = TestSet(tests.size());
    for (const auto& jk : jm["kills"]) {
      if (!jk.is_object() || !jk.contains("test_id") || !jk.contains("reason") ||
          !jk["test_id"].is_string() || !jk["reason"].is_string())
        throw ParseError(path.string() + ": kill entries need 'test_id' and 'reason' strings");
      std::string test = jk["test_id"].get<std::string>();
      auto col_it = columns.find(test);
      if (col_it == columns.end())
        throw ValidationError(path.string() + ": mutant '" + m.id +
                              "' kills unknown test '" + test + "'");
      auto reason = kill_reason_from_string(jk["reason"].get<std::string>());
      if (!reason)
        throw ParseError(path.string() + ": bad kill reason '" +
                         jk["reason"].get<std::string>() + "'");
      if (m.kills.test(col_it->second))
        throw ValidationError(path.string() + ": mutant '" + m.id +
                              "' lists test '" + test + "' twice");
      m.kills.set(col_it->second);
      m.reasons.emplace(col_it->second, *reason);
    }
    mutants.push_back(std::move(m));
  }
  if (mutants.empty()) throw EmptyCorpus("no mutants in " + path.string());
  return KillMatrix(std::move(tests), std::move(mutants));
}

void save_kill_matrix_csv(const KillMatrix& km, const std::filesystem::path& csv_path,
                          const std::filesystem::path& tests_path) {
  std::string tests_out;
  for (const TestId& t : km.tests()) {
    tests_out += t.name;
    tests_out += '\n';
  }
  write_file(tests_path, tests_out);

  std::string out = "mutant_id,method,test_id,outcome,reason\n";
  for (const Mutant& m : km.mutants()) {
    for (std::size_t col = 0; col < km.test_count(); ++col) {
      out += m.id;
      out += ',';
      out += m.method.qualified_name;
      out += ',';
      out += km.tests()[col].name;
      if (m.kills.test(col)) {
        out += ",KILLED,";
        out += to_string(m.reasons.at(static_cast<std::uint32_t>(col)));
      } else {
        out += ",SURVIVED,";
      }
      out += '\n';
    }
  }
  write_file(csv_path, out);
}

void save_kill_matrix(const KillMatrix& km, const std::filesystem::path& path,
                      MatrixFormat format) {
  if (format == MatrixFormat::Csv) {
    save_kill_matrix_csv(km, path, sibling_tests_path(path));
    return;
  }
  json j;
  j["tests"] = json::array();
  for (const TestId& t : km.tests()) j["tests"].push_back(t.name);
  j["mutants"] = json::array();
  for (const Mutant& m : km.mutants()) {
    json jm;
    jm["mutant_id"] = m.id;
    jm["method"] = m.method.qualified_name;
    jm["kills"] = json::array();
    for (std::size_t col : m.kills.bits()) {
      json jk;
      jk["test_id"] = km.tests()[col].name;
      jk["reason"] = std::string(to_string(m.reasons.at(static_cast<std::uint32_t>(col))));
      jm["kills"].push_back(jk);
    }
    j["mutants"].push_back(jm);
  }
  write_file(path, j.dump(2) + "\n");
}

FailureSnapshot load_failure_snapshot(const std::filesystem::path& path) {
  json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("failing") || !j.contains("passing"))
    throw ParseError(path.string() + ": expected an object with 'failing' and 'passing'");

  std::set<TestId> failing = test_set_from_json(j["failing"], "failing", path);
  std::set<TestId> passing = test_set_from_json(j["passing"], "passing", path);

  std::optional<std::set<MethodId>> covered;
  if (j.contains("covered_methods") && !j["covered_methods"].is_null()) {
    if (!j["covered_methods"].is_array())
      throw ParseError(path.string() + ": 'covered_methods' must be an array or null");
    covered.emplace();
    for (const auto& v : j["covered_methods"]) {
      if (!v.is_string())
        throw ParseError(path.string() + ": 'covered_methods' entries must be strings");
      covered->insert(MethodId{v.get<std::string>()});
    }
  }
  return FailureSnapshot(std::move(failing), std::move(passing), std::move(covered));
}

void save_failure_snapshot(const FailureSnapshot& snap, const std::filesystem::path& path) {
  json j;
  j["failing"] = json::array();
  for (const TestId& t : snap.failing()) j["failing"].push_back(t.name);
  j["passing"] = json::array();
  for (const TestId& t : snap.passing()) j["passing"].push_back(t.name);
  if (snap.covered_methods()) {
    j["covered_methods"] = json::array();
    for (const MethodId& m : *snap.covered_methods())
      j["covered_methods"].push_back(m.qualified_name);
  } else {
    j["covered_methods"] = nullptr;
  }
  write_file(path, j.dump(2) + "\n");
}

KillMatrix restrict_to_coverage(const KillMatrix& km, const FailureSnapshot& snap) {
  if (!snap.covered_methods())
    throw NoCoverage("snapshot carries no coverage information");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < km.mutant_count(); ++i)
    if (snap.covered_methods()->count(km.mutants()[i].method)) keep.push_back(i);
  return select_mutants(km, keep);
}

KillMatrix select_mutants(const KillMatrix& km, const std::vector<std::size_t>& keep) {
  std::vector<Mutant> mutants;
  mutants.reserve(keep.size());
  for (std::size_t i : keep) mutants.push_back(km.mutants().at(i));
  return KillMatrix(km.tests(), std::move(mutants));
}

}  // namespace mutrank

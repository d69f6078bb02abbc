#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <variant>

#include "mutrank/rational.hpp"

namespace mutrank {

struct MethodId;

// A suspiciousness value. Counting models carry exact rationals so ties are
// decided by arithmetic, not floating-point luck; log-domain and classifier
// models carry doubles. Comparison is exact within a kind and never mixes
// kinds in practice (one model produces one kind).
class Score {
 public:
  Score() : v_(Rational(0)) {}

  static Score count(std::int64_t n) { return Score(Rational(n)); }
  static Score exact(Rational r) { return Score(r); }
  static Score real(double d) { return Score(d); }

  bool is_exact() const { return std::holds_alternative<Rational>(v_); }
  const Rational& rational() const { return std::get<Rational>(v_); }
  double real_value() const { return std::get<double>(v_); }

  double as_double() const {
    return is_exact() ? rational().to_double() : real_value();
  }

  std::string to_string() const {
    if (is_exact()) return rational().to_string();
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", real_value());
    return buf;
  }

  friend bool operator==(const Score& a, const Score& b) {
    if (a.is_exact() != b.is_exact()) return false;
    if (a.is_exact()) return a.rational() == b.rational();
    return a.real_value() == b.real_value();
  }

  friend bool operator<(const Score& a, const Score& b) {
    if (a.is_exact() && b.is_exact()) return a.rational() < b.rational();
    return a.as_double() < b.as_double();
  }

  friend bool operator>(const Score& a, const Score& b) { return b < a; }

 private:
  explicit Score(Rational r) : v_(r) {}
  explicit Score(double d) : v_(d) {}

  std::variant<Rational, double> v_;
};

}  // namespace mutrank

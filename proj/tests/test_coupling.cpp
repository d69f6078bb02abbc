#include "doctest.h"
#include "fixtures.hpp"
#include "mutrank/coupling.hpp"
#include "mutrank/rng.hpp"
#include "oracle.hpp"

using namespace mutrank;
using fixtures::kGetType;
using fixtures::kResolveType;

TEST_SUITE("coupling") {
  TEST_CASE("per-mutant coupling on the worked example") {
    auto km = fixtures::fixture_matrix();
    auto failing = resolve_snapshot(km, fixtures::snap({"t1", "t2"})).failing;
    // m1 kills {t1,t2}: every killer fails.
    CHECK(coupling::pc(km.mutants()[0], failing) == Rational(1));
    // m2 kills {t3}: no overlap.
    CHECK(coupling::pc(km.mutants()[1], failing) == Rational(0));
    // m3 kills {t2,t3}: one of two killers fails.
    CHECK(coupling::pc(km.mutants()[2], failing) == Rational(1, 2));
    // m6 kills {t1,t2,t3}: two of three.
    CHECK(coupling::pc(km.mutants()[4], failing) == Rational(2, 3));
  }

  TEST_CASE("a never-killed mutant couples to nothing") {
    auto km = fixtures::fixture_matrix();
    Mutant unkilled{"mx", MethodId{"A#a"}, TestSet(km.test_count()), {}};
    auto failing = resolve_snapshot(km, fixtures::snap({"t1"})).failing;
    CHECK(coupling::pc(unkilled, failing) == Rational(0));
  }

  TEST_CASE("per-method sums stay exact") {
    auto km = fixtures::fixture_matrix();
    auto sv = coupling::score_pc_fp(km, fixtures::snap({"t1", "t2"}));
    // getType: 1 + 0 + 1/2; resolveType: 1 + 2/3.
    REQUIRE(sv.at(MethodId{kGetType}).is_exact());
    CHECK(sv.at(MethodId{kGetType}).rational() == Rational(3, 2));
    CHECK(sv.at(MethodId{kResolveType}).rational() == Rational(5, 3));
    CHECK(sv.at(MethodId{kResolveType}) > sv.at(MethodId{kGetType}));
  }

  TEST_CASE("when every test fails every killed mutant couples fully") {
    auto km = fixtures::fixture_matrix();
    auto sv = coupling::score_pc_fp(km, fixtures::snap({"t1", "t2", "t3", "t4"}));
    CHECK(sv.at(MethodId{kGetType}).rational() == Rational(3));
    CHECK(sv.at(MethodId{kResolveType}).rational() == Rational(2));
  }

  TEST_CASE("coupling scores stay within their bounds") {
    mutrank::rng::Engine eng(4242);
    for (int iter = 0; iter < 60; ++iter) {
      auto rc = oracle::random_case(eng);
      auto failing = resolve_snapshot(rc.matrix, rc.snapshot).failing;
      for (const auto& m : rc.matrix.mutants()) {
        auto v = coupling::pc(m, failing);
        CHECK(Rational(0) <= v);
        CHECK(v <= Rational(1));
      }
      auto sv = coupling::score_pc_fp(rc.matrix, rc.snapshot);
      for (const auto& [method, score] : sv) {
        REQUIRE(score.is_exact());
        auto bucket = rc.matrix.by_method().at(method).size();
        CHECK(score.rational() <= Rational(static_cast<std::int64_t>(bucket)));
        CHECK(Rational(0) <= score.rational());
      }
    }
  }

  TEST_CASE("growing the failing set never lowers a mutant's coupling") {
    mutrank::rng::Engine eng(515);
    for (int iter = 0; iter < 40; ++iter) {
      auto rc = oracle::random_case(eng);
      auto view = resolve_snapshot(rc.matrix, rc.snapshot);
      TestSet grown = view.failing;
      for (std::size_t t = 0; t < rc.matrix.test_count(); ++t)
        if (!grown.test(t) && eng.below(2) == 0) grown.set(t);
      for (const auto& m : rc.matrix.mutants())
        CHECK(coupling::pc(m, view.failing) <= coupling::pc(m, grown));
    }
  }

  TEST_CASE("random matrices agree with the brute-force reference") {
    mutrank::rng::Engine eng(909);
    for (int iter = 0; iter < 120; ++iter) {
      auto rc = oracle::random_case(eng);
      auto in = oracle::from_matrix(rc.matrix, rc.snapshot);
      auto failing = resolve_snapshot(rc.matrix, rc.snapshot).failing;
      for (const auto& m : rc.matrix.mutants()) {
        auto got = coupling::pc(m, failing);
        auto want = oracle::pc_of(in, m.id);
        CHECK(got.to_string() ==
              (want.den == 1 ? std::to_string(want.num)
                             : std::to_string(want.num) + "/" + std::to_string(want.den)));
      }
      auto sv = coupling::score_pc_fp(rc.matrix, rc.snapshot);
      auto want = oracle::pc_fp(in);
      REQUIRE(sv.size() == want.size());
      for (const auto& [method, score] : sv) {
        const auto& w = want.at(method.qualified_name);
        CHECK(score.rational() == Rational(w.num, w.den));
      }
    }
  }
}

#include <doctest.h>

#include "fo2/engine.hpp"
#include "fo2/oracle.hpp"
#include "random_problems.hpp"
#include "support.hpp"

using namespace fo2;
using fo2test::normalized;
using fo2test::problem;

namespace {

CellStructure cells_of(const NormalizedProblem& np) {
  return CellStructure(np.matrix, np.signature);
}

Integer count_with(const NormalizedProblem& np, int n, EnginePath path) {
  CountRequest r;
  r.path = path;
  Rational v = count(np, n, r).total;
  REQUIRE(is_integer(v));
  return v.get_num();
}

}  // namespace

TEST_CASE("single term of the running example") {
  NormalizedProblem np = normalized(problem(fo2test::kRunning));
  CellStructure c = cells_of(np);
  CHECK(universal_term(c, {2, 0, 0, 1}) == 48);
  // 3 * n_00^1 * n_03^2
  CHECK(universal_term(c, {2, 0, 0, 1}) ==
        multinomial({2, 0, 0, 1}) * c.nij(0, 0) * c.nij(0, 3) * c.nij(0, 3));
}

TEST_CASE("running example totals") {
  Problem p = problem(fo2test::kRunning);
  NormalizedProblem np = normalized(p);
  CellStructure c = cells_of(np);
  CHECK(fomc_universal(c, 2) == 48);
  for (int n = 1; n <= 4; ++n) {
    CHECK(fomc_universal(c, n) == oracle_count(p, n));
    CHECK(fomc(np, n) == fomc_universal(c, n));
    CHECK(fomc_scott(np, n) == fomc_universal(c, n));
  }
}

TEST_CASE("tautology over one unary predicate") {
  NormalizedProblem np =
      normalized(problem("predicate A/1\nforall x (A(x) | !A(x))\n"));
  for (int n = 1; n <= 10; ++n) CHECK(fomc(np, n) == ipow(2, n));
}

TEST_CASE("stratified identity") {
  Problem p = problem(fo2test::kRunning);
  NormalizedProblem np = normalized(p);
  CellStructure c = cells_of(np);
  OracleOptions o;
  o.census_slots = c.unary_slots();
  for (int n = 1; n <= 3; ++n) {
    OracleReport r = oracle_enumerate(p, n, o);
    auto terms = universal_terms(c, n);
    std::map<std::vector<int>, Integer> engine(terms.begin(), terms.end());
    for (auto& [k, v] : engine) CHECK(r.by_census[k] == v);
    for (auto& [k, v] : r.by_census) CHECK(engine[k] == v);
  }
}

TEST_CASE("existentials") {
  NormalizedProblem np =
      normalized(problem("predicate R/2\nforall x exists y R(x,y)\n"));
  CHECK(fomc_scott(np, 2) == 9);
  CHECK(fomc_scott(np, 3) == 343);
  for (int n = 1; n <= 8; ++n) CHECK(fomc(np, n) == ipow(ipow(2, n) - 1, n));
}

TEST_CASE("Lemma E-m") {
  NormalizedProblem np =
      normalized(problem("predicate R/2\nforall x exists y R(x,y)\n"));
  const int n = 4;
  std::vector<Integer> p(n + 1);
  for (int m = 0; m <= n; ++m) p[m] = lemma_em_diagnostic(np, n, m).p;
  CHECK(lemma_em_diagnostic(np, n, 2).e == p[2] - 3 * p[3] + 6 * p[4]);
  CHECK(lemma_em_diagnostic(np, n, n).e == p[n]);
  for (int k = 3; k <= 4; ++k) {
    Integer sum(0);
    for (int m = 1; m <= k; ++m) sum += lemma_em_diagnostic(np, k, m).e;
    CHECK(sum == lemma_em_diagnostic(np, k, 0).p - fomc_scott(np, k));
  }
  // Without the existential the count is the universal one.
  NormalizedProblem u =
      normalized(problem("predicate R/2\nforall x forall y (R(x,y) | !R(x,y))\n"));
  CHECK(fomc_scott(u, 3) == fomc_universal(cells_of(u), 3));
}

TEST_CASE("cardinality constraints") {
  Problem p = problem(fo2test::kRunning);
  NormalizedProblem np = normalized(p);
  Signature sig = p.signature;
  for (int n = 1; n <= 4; ++n) {
    // balanced A
    CardConstraint bal = parse_constraint("2*|A| >= n & 2*|A| <= n + 1", sig);
    Problem pb = p;
    pb.constraint = bal;
    CHECK(fomc_constrained(np, n, bal) == oracle_count(pb, n));
  }
  CardConstraint both = parse_constraint("|A| = 2 & |R| = 2", sig);
  Problem pc = p;
  pc.constraint = both;
  CHECK(fomc_constrained(np, 3, both) == oracle_count(pc, 3));
  CHECK(fomc_constrained(np, 3, card_true()) == fomc_scott(np, 3));
}

TEST_CASE("counting quantifiers") {
  auto f = [](const char* text, int n) {
    return fomc(normalized(problem(text)), n);
  };
  CHECK(f("predicate R/2\nforall x exists{=1} y R(x,y)\n", 3) == 27);
  CHECK(f("predicate R/2\nforall x exists{=2} y R(x,y)\n", 3) == 27);
  CHECK(f("predicate R/2\nforall x (forall y !R(x,y) | exists{=2} y R(x,y))\n",
          3) == 64);
  for (int n = 1; n <= 8; ++n)
    CHECK(f("predicate R/2\nforall x exists{=1} y R(x,y)\n", n) == ipow(n, n));
}

TEST_CASE("profile breakdown") {
  Problem p = problem(fo2test::kRunning);
  NormalizedProblem np = normalized(p);
  CountRequest r;
  r.track = {"A"};
  CountResult res = count(np, 2, r);
  REQUIRE(res.profiles.size() == 3);
  for (const auto& [k, v] : res.profiles) CHECK(v == 16);
  CHECK(res.total == 48);

  CountResult none = count(np, 3);
  REQUIRE(none.profiles.size() == 1);
  CHECK(none.profiles[0].second == fomc_scott(np, 3));

  r.track = {"R"};
  res = count(np, 2, r);
  OracleReport o = oracle_enumerate(p, 2);
  std::map<long long, Integer> by_r;
  for (const auto& [k, v] : o.by_cardinality) by_r[k[1]] += v;
  Rational sum(0);
  for (const auto& [k, v] : res.profiles) {
    CHECK(v == by_r[k[0]]);
    sum += v;
  }
  CHECK(sum == 48);
}

TEST_CASE("general and separable paths agree") {
  for (const char* entry : {"forall_exists", "guarded_exists", "exactly_two",
                            "none_or_two", "in_and_out", "mixed_guarded"}) {
    CAPTURE(entry);
    NormalizedProblem np = normalized(fo2test::corpus_problem(entry));
    if (!cells_of(np).separable()) continue;
    for (int n = 1; n <= 5; ++n)
      CHECK(count_with(np, n, EnginePath::General) ==
            count_with(np, n, EnginePath::Separable));
  }
}

TEST_CASE("counts are non-negative and independent of thread count") {
  fo2test::RandomProblems gen(21);
  for (int i = 0; i < 30; ++i) {
    Problem p = parse_problem(gen.next());
    CAPTURE(to_source(p));
    NormalizedProblem np = normalized(p);
    for (int n = 1; n <= 3; ++n) {
      CountRequest one, many;
      one.threads = 1;
      many.threads = 4;
      Rational a = count(np, n, one).total, b = count(np, n, many).total;
      CHECK(a == b);
      CHECK(is_integer(a));
      CHECK(sgn(a) >= 0);
    }
  }
}

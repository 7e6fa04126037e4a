#include <doctest.h>

#include <random>

#include "fo2/errors.hpp"
#include "fo2/eval.hpp"
#include "fo2/oracle.hpp"
#include "support.hpp"

using namespace fo2;
using fo2test::problem;

TEST_CASE("contradiction") {
  Problem p = problem("predicate A/1\nforall x (A(x) & !A(x))\n");
  for (int n = 1; n <= 4; ++n) CHECK(oracle_count(p, n) == 0);
}

TEST_CASE("running example") {
  OracleReport r = oracle_enumerate(problem(fo2test::kRunning), 2);
  CHECK(r.models == 48);
  CHECK(r.enumerated == 64);
  std::map<long long, Integer> by_a;
  Integer sum(0);
  for (const auto& [k, v] : r.by_cardinality) {
    by_a[k[0]] += v;
    sum += v;
  }
  CHECK(sum == r.models);
  CHECK(by_a == std::map<long long, Integer>{{0, 16}, {1, 16}, {2, 16}});
}

TEST_CASE("census") {
  Problem p = problem(fo2test::kRunning);
  OracleOptions o;
  o.census_slots = {{"A", false}, {"R", true}};
  OracleReport r = oracle_enumerate(p, 2, o);
  CHECK(r.by_census[{0, 0, 0, 2}] == 4);
  Integer sum(0);
  for (const auto& [k, v] : r.by_census) sum += v;
  CHECK(sum == 48);
}

TEST_CASE("binomial row") {
  Problem p = problem("predicate A/1\nforall x (A(x) | !A(x))\n");
  for (int n = 1; n <= 6; ++n) {
    OracleReport r = oracle_enumerate(p, n);
    for (int m = 0; m <= n; ++m)
      CHECK(r.by_cardinality[{m}] == binomial(n, m));
  }
}

TEST_CASE("successor counting is literal") {
  Problem p = problem("predicate R/2\nforall x exists{=1} y R(x,y)\n");
  CHECK(oracle_count(p, 3) == 27);
  Problem le = problem("predicate R/2\nforall x exists{<=1} y R(x,y)\n");
  CHECK(oracle_count(le, 3) == 64);
  Problem ge = problem("predicate R/2\nforall x exists{>=2} y R(x,y)\n");
  CHECK(oracle_count(ge, 3) == 64);
}

TEST_CASE("constraints apply to ground cardinalities") {
  Problem p = problem(
      "predicate A/1\nforall x (A(x) | !A(x))\nconstraint |A| = 2\n");
  CHECK(oracle_count(p, 4) == 6);
}

TEST_CASE("satisfying assignments are closed under domain permutations") {
  Problem p = problem(
      "predicate A/1\npredicate R/2\n"
      "forall x (A(x) -> exists{=1} y R(x,y)) & forall x forall y (R(x,y) -> "
      "A(x) | A(y))\n");
  const int n = 3;
  GroundFormula g = ground(p.sentence, p.signature, n);
  std::mt19937 rng(1);
  int seen = 0;
  for (int trial = 0; trial < 4000 && seen < 40; ++trial) {
    std::vector<bool> a(g.atom_count());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng() & 1;
    if (!g.evaluate(a)) continue;
    ++seen;
    std::vector<int> perm = {0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<bool> b(a.size());
    for (int c = 0; c < n; ++c) {
      b[g.atom_index(0, perm[c])] = a[g.atom_index(0, c)];
      for (int d = 0; d < n; ++d)
        b[g.atom_index(1, perm[c], perm[d])] = a[g.atom_index(1, c, d)];
    }
    CHECK(g.evaluate(b));
  }
  CHECK(seen > 0);
}

TEST_CASE("results do not depend on the thread count") {
  Problem p = fo2test::corpus_problem("mixed_shared");
  OracleOptions one, four;
  one.threads = 1;
  four.threads = 4;
  OracleReport a = oracle_enumerate(p, 3, one), b = oracle_enumerate(p, 3, four);
  CHECK(a.models == b.models);
  CHECK(a.by_cardinality == b.by_cardinality);
}

TEST_CASE("cap") {
  Problem p = problem("predicate R/2\npredicate S/2\nforall x forall y R(x,y)\n");
  CHECK_THROWS_AS(oracle_count(p, 4), Error);
  OracleOptions o;
  o.cap = 8;
  CHECK_THROWS_AS(oracle_count(problem(fo2test::kRunning), 3, o), Error);
  CHECK_NOTHROW(oracle_count(problem(fo2test::kRunning), 2, o));
}

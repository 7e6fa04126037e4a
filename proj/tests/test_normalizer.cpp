#include <doctest.h>

#include "fo2/engine.hpp"
#include "fo2/errors.hpp"
#include "fo2/normalizer.hpp"
#include "fo2/oracle.hpp"
#include "random_problems.hpp"
#include "support.hpp"

using namespace fo2;
using fo2test::normalized;
using fo2test::problem;

namespace {

Formula sentence(const std::string& text, Signature& sig) {
  return parse_sentence(text, sig, {false});
}

bool mentions(const Formula& f, const std::string& needle) {
  return to_string(f).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("counting sugar") {
  Signature sig;
  Formula ge1 = sentence("forall x exists{>=1} y R(x,y)", sig);
  CHECK(to_string(expand_counting_sugar(ge1)) ==
        to_string(sentence("forall x !(forall y !R(x,y))", sig)));
  Formula le1 = sentence("forall x exists{<=1} y R(x,y)", sig);
  CHECK(to_string(expand_counting_sugar(le1)) ==
        to_string(sentence(
            "forall x ((forall y !R(x,y)) | exists{=1} y R(x,y))", sig)));
  Formula eq0 = sentence("forall x exists{=0} y R(x,y)", sig);
  CHECK(to_string(expand_counting_sugar(eq0)) ==
        to_string(sentence("forall x forall y !R(x,y)", sig)));
}

TEST_CASE("expanded sugar is model-equivalent") {
  for (const char* text :
       {"predicate R/2\nforall x exists{>=2} y R(x,y)\n",
        "predicate R/2\nforall x exists{<=2} y R(x,y)\n",
        "predicate R/2\nforall x exists{>=1} y R(y,x)\n"}) {
    Problem p = problem(text);
    Problem q = p;
    q.sentence = expand_counting_sugar(p.sentence);
    CHECK(to_string(q.sentence).find(">=") == std::string::npos);
    CHECK(to_string(q.sentence).find("<=") == std::string::npos);
    for (int n = 1; n <= 4; ++n) {
      CAPTURE(text);
      CAPTURE(n);
      CHECK(oracle_count(p, n) == oracle_count(q, n));
      CHECK(fomc(normalized(p), n) == oracle_count(p, n));
    }
  }
}

TEST_CASE("arxiv example encoding") {
  NormalizedProblem np = normalized(problem(
      "predicate R/2\nforall x (forall y !R(x,y) | exists{=2} y R(x,y))\n"));
  REQUIRE(np.blocks.size() == 1);
  CHECK(np.blocks[0].m == 2);
  CHECK(np.blocks[0].f.size() == 2);
  CHECK(mentions(np.matrix, "!R(x,y) | __A1(x)"));
  CHECK(mentions(np.matrix, "__f1_1(x,y) -> !__f1_2(x,y)"));
  CHECK(np.sign_predicates.size() == 2);
  for (int n = 1; n <= 6; ++n) {
    Integer expect = ipow(1 + binomial(n, 2), n);
    CHECK(fomc(np, n) == expect);
    CHECK(fomc(normalized(problem("predicate R/2\nforall x (forall y !R(x,y) | "
                                  "exists{=2} y R(x,y))\n"),
                          CountingStrategy::Maximize),
               n) == expect);
  }
}

TEST_CASE("single-variable counting becomes a cardinality constraint") {
  NormalizedProblem np = normalized(problem("predicate A/1\nexists{=1} x A(x)\n"));
  CHECK(np.blocks.empty());
  CHECK(np.sign_predicates.empty());
  CHECK(to_string(np.constraint) == "|__C1| = 1");
  for (int n = 1; n <= 5; ++n) CHECK(fomc(np, n) == n);
}

TEST_CASE("m = 1 blocks have no disjointness axioms") {
  NormalizedProblem np =
      normalized(problem("predicate R/2\nforall x exists{=1} y R(x,y)\n"));
  REQUIRE(np.blocks.size() == 1);
  CHECK(np.blocks[0].f.size() == 1);
  CHECK_FALSE(mentions(np.matrix, "!__f1_"));
}

TEST_CASE("Scott normal form") {
  Signature sig;
  sig.add("R", 2);
  sig.add("A", 1);
  NameSupply names;
  ScottForm s = to_scott(sentence("forall x exists y R(x,y)", sig), sig, names);
  REQUIRE(s.existentials.size() == 1);
  CHECK(to_string(s.existentials[0]) == "R(x,y)");

  Problem ex = problem("predicate A/1\nexists x A(x)\n");
  NormalizedProblem np = normalized(ex);
  REQUIRE(np.existentials.size() == 1);
  CHECK(to_string(np.existentials[0]) == "A(y)");

  Problem guarded =
      problem("predicate A/1\npredicate R/2\nforall x (A(x) -> exists y R(x,y))\n");
  np = normalized(guarded);
  REQUIRE(np.existentials.size() == 1);
  CHECK(to_string(np.existentials[0]) == "!A(x) | R(x,y)");
  for (int n = 1; n <= 4; ++n) {
    CHECK(fomc(normalized(ex), n) == oracle_count(ex, n));
    CHECK(fomc(np, n) == oracle_count(guarded, n));
  }
}

TEST_CASE("existential elimination") {
  NormalizedProblem np =
      normalized(problem("predicate R/2\nforall x exists y R(x,y)\n"));
  REQUIRE(np.sign_predicates == std::vector<std::string>{"__P1"});
  CHECK(to_string(np.matrix) == "__P1(x) -> !R(x,y)");
  CHECK(np.negative_predicates() == np.sign_predicates);

  NormalizedProblem plain = normalized(problem(fo2test::kRunning));
  CHECK(plain.sign_predicates.empty());
  CHECK(plain.blocks.empty());
}

TEST_CASE("self-witnessed existentials are dropped") {
  NormalizedProblem np =
      normalized(problem("predicate R/2\nforall x exists y (x = y | R(x,y))\n"));
  CHECK(np.sign_predicates.empty());
}

TEST_CASE("fresh names do not collide with user predicates") {
  Problem p = parse_problem(
      "predicate __P1/1\npredicate R/2\nforall x exists y R(x,y) & forall x "
      "__P1(x)\n",
      {true, true});
  NormalizedProblem np = normalized(p);
  for (const auto& s : np.sign_predicates) CHECK(s != "__P1");
  for (const auto& pr : p.signature.predicates())
    CHECK(np.signature.arity(pr.name) == pr.arity);
  for (int n = 1; n <= 3; ++n) CHECK(fomc(np, n) == oracle_count(p, n));
}

TEST_CASE("normalization is idempotent on the matrix") {
  for (const char* entry :
       {"running_example", "forall_exists", "exactly_two", "mixed_shared"}) {
    CAPTURE(entry);
    NormalizedProblem np = normalized(fo2test::corpus_problem(entry));
    Problem again;
    again.signature = np.signature;
    again.sentence = make_forall(Var::X, make_forall(Var::Y, np.matrix));
    NormalizedProblem twice = normalize(again);
    CHECK(structurally_equal(twice.matrix, np.matrix));
    CHECK(twice.sign_predicates.empty());
    CHECK(twice.blocks.empty());
  }
}

TEST_CASE("m = 0 counting") {
  Problem p = problem("predicate R/2\nforall x exists{=0} y R(x,y)\n");
  NormalizedProblem np = normalized(p);
  CHECK(np.blocks.empty());
  for (int n = 1; n <= 4; ++n) CHECK(fomc(np, n) == 1);
}

TEST_CASE("counting beyond the domain size") {
  Problem p = problem("predicate R/2\nforall x exists{=3} y R(x,y)\n");
  NormalizedProblem np = normalized(p);
  CHECK(fomc(np, 1) == 0);
  CHECK(fomc(np, 2) == 0);
  CHECK(fomc(np, 3) == 1);
  CHECK(fomc(np, 4) == 256);
}

TEST_CASE("the maximize encoding overcounts a defined counting atom") {
  Problem p = fo2test::corpus_problem("defined_or_counted");
  NormalizedProblem ex = normalized(p, CountingStrategy::Exclusion);
  NormalizedProblem mx = normalized(p, CountingStrategy::Maximize);
  CHECK(mx.maximize.size() == 1);
  CHECK(fomc(ex, 2) == oracle_count(p, 2));
  CHECK(oracle_count(p, 2) == 36);
  CHECK(fomc(mx, 2) == 64);
}

TEST_CASE("normalization preserves the count on random problems") {
  fo2test::RandomProblems gen(11);
  for (int i = 0; i < 40; ++i) {
    Problem p = parse_problem(gen.next());
    CAPTURE(to_source(p));
    NormalizedProblem np = normalized(p);
    for (int n = 1; n <= 3; ++n) CHECK(fomc(np, n) == oracle_count(p, n));
  }
}

TEST_CASE("dump") {
  NormalizedProblem np = normalized(fo2test::corpus_problem("none_or_two"));
  std::string d = dump(np);
  CHECK(d.find("# normalized (counting strategy: exclusion)") == 0);
  CHECK(d.find("# sign __P1: exists y.") != std::string::npos);
  CHECK(d.find("# block 1: __A1(x) <-> exists{=2} y. R(x,y)") !=
        std::string::npos);
  CHECK(d.find("constraint 2*(|__A1| + |__B1|) = |__f1_1| + |__f1_2|") !=
        std::string::npos);
  // The dump is valid input for the matrix part.
  Problem back = parse_problem(d, {true, true});
  CHECK(structurally_equal(back.sentence,
                           make_forall(Var::X, make_forall(Var::Y, np.matrix))));
}

TEST_CASE("nested counting is unsupported") {
  CHECK_THROWS_AS(
      normalized(problem("predicate R/2\nforall x exists{=1} y (R(x,y) & "
                         "exists{=1} x R(y,x))\n")),
      UnsupportedError);
}

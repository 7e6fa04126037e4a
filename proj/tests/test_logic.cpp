#include <doctest.h>

#include <filesystem>
#include <random>

#include "fo2/errors.hpp"
#include "fo2/eval.hpp"
#include "fo2/formula.hpp"
#include "fo2/oracle.hpp"
#include "fo2/problem.hpp"
#include "support.hpp"

using namespace fo2;
using fo2test::problem;

namespace {

// Phi(X): the matrix instantiated on every pair of variables.
Formula instantiate(const Formula& phi) {
  return make_and({substitute(phi, Var::Y, Var::X), phi, swap_vars(phi),
                   substitute(phi, Var::X, Var::Y)});
}

Formula running_matrix(Signature& sig) {
  Formula f = parse_sentence(
      "forall x forall y (A(x) & R(x,y) & x != y -> A(y))", sig, {false});
  return f->kids[0]->kids[0];
}

}  // namespace

TEST_CASE("parses the running example") {
  Problem p = problem(fo2test::kRunning);
  const Node& f = *p.sentence;
  CHECK(f.op == Op::Forall);
  CHECK(f.bound == Var::X);
  CHECK(f.kids[0]->op == Op::Forall);
  CHECK(f.kids[0]->bound == Var::Y);
  const Node& imp = *f.kids[0]->kids[0];
  REQUIRE(imp.op == Op::Implies);
  CHECK(imp.kids[0]->op == Op::And);
  CHECK(imp.kids[0]->kids.size() == 3);
  CHECK(imp.kids[1]->op == Op::Atom);
  CHECK(imp.kids[1]->pred == "A");
  CHECK(imp.kids[1]->args == std::vector<Var>{Var::Y});
}

TEST_CASE("counting quantifier node") {
  Problem p = problem("predicate R/2\nforall x exists{=2} y R(x,y)\n");
  const Node& c = *p.sentence->kids[0];
  CHECK(c.op == Op::CountEq);
  CHECK(c.count == 2);
  CHECK(c.bound == Var::Y);
  CHECK(contains_counting(p.sentence));
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(problem("forall x (A(x))\n"), SemanticError);
  CHECK_THROWS_AS(problem("predicate A/1\nforall x A(y)\n"), SemanticError);
  CHECK_THROWS_AS(problem("predicate A/1\npredicate A/2\n"), SemanticError);
  CHECK_THROWS_AS(problem("predicate A/1\nforall x (A(x)\n"), ParseError);
  CHECK_THROWS_AS(problem("predicate A/1\nforall z A(z)\n"), Error);
  CHECK_THROWS_AS(problem("predicate __P/1\nforall x __P(x)\n"), Error);
  try {
    problem("predicate A/1\nforall x (A(x) &)\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 1);
  }
}

TEST_CASE("non-strict parsing infers arities") {
  Problem p = parse_problem("forall x exists y R(x,y) & B(x)\n", {false});
  CHECK(p.signature.arity("R") == 2);
  CHECK(p.signature.arity("B") == 1);
}

TEST_CASE("round trip over the corpus") {
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(FO2_CORPUS_DIR)) {
    if (e.path().extension() != ".fo2") continue;
    ++files;
    CAPTURE(e.path().string());
    Problem p = parse_problem(fo2test::read_text(e.path().string()));
    Problem q = parse_problem(to_source(p));
    CHECK(structurally_equal(p.sentence, q.sentence));
    CHECK(to_string(p.constraint) == to_string(q.constraint));
    CHECK(to_source(p) == to_source(q));
    Signature sig = p.signature;
    CHECK(structurally_equal(parse_sentence(to_string(p.sentence), sig),
                             p.sentence));
  }
  CHECK(files >= 20);
}

TEST_CASE("eval_qf on the example interpretation is false") {
  Signature sig;
  Formula phi = instantiate(running_matrix(sig));
  LiftedAssignment tau;
  tau.set("A", {Var::X}, false);
  tau.set("R", {Var::X, Var::X}, true);
  tau.set("A", {Var::Y}, true);
  tau.set("R", {Var::Y, Var::Y}, true);
  tau.set("R", {Var::X, Var::Y}, false);
  tau.set("R", {Var::Y, Var::X}, true);
  CHECK_FALSE(eval_qf(phi, tau));
  CHECK_FALSE(eval_qf(phi, tau.swapped()));
}

TEST_CASE("eval_qf basics") {
  Signature sig;
  Formula phi = running_matrix(sig);
  LiftedAssignment tau;
  tau.set("A", {Var::X}, false);
  tau.set("R", {Var::X, Var::Y}, true);
  tau.set("A", {Var::Y}, false);
  CHECK(eval_qf(phi, tau));
  CHECK(eval_qf(make_eq(Var::X, Var::X), tau));
  CHECK_FALSE(eval_qf(make_eq(Var::X, Var::Y), tau));
  Formula taut = make_or({make_atom("A", {Var::X}),
                          make_not(make_atom("A", {Var::X}))});
  CHECK(eval_qf(taut, tau));
  LiftedAssignment empty;
  CHECK_THROWS_AS(eval_qf(phi, empty), SemanticError);
}

TEST_CASE("eval_qf is invariant under exchanging x and y") {
  std::mt19937 rng(7);
  const std::vector<std::pair<std::string, std::vector<Var>>> atoms = {
      {"A", {Var::X}},         {"A", {Var::Y}},         {"R", {Var::X, Var::X}},
      {"R", {Var::X, Var::Y}}, {"R", {Var::Y, Var::X}}, {"R", {Var::Y, Var::Y}}};
  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    int pick = depth == 0 ? rng() % 2 : rng() % 6;
    if (pick == 0) {
      const auto& a = atoms[rng() % atoms.size()];
      return make_atom(a.first, a.second);
    }
    if (pick == 1) return make_eq(Var::X, Var::Y);
    if (pick == 2) return make_not(gen(depth - 1));
    if (pick == 3) return make_and({gen(depth - 1), gen(depth - 1)});
    if (pick == 4) return make_or({gen(depth - 1), gen(depth - 1)});
    return make_iff(gen(depth - 1), gen(depth - 1));
  };
  for (int trial = 0; trial < 300; ++trial) {
    Formula f = gen(4);
    LiftedAssignment tau;
    for (const auto& a : atoms) tau.set(a.first, a.second, rng() & 1);
    CHECK(eval_qf(f, tau) == eval_qf(swap_vars(f), tau.swapped()));
    // The instantiated formula is itself symmetric.
    Formula g = instantiate(f);
    CHECK(eval_qf(g, tau) == eval_qf(g, tau.swapped()));
  }
}

TEST_CASE("grounding") {
  Problem p = problem(fo2test::kRunning);
  for (int n = 1; n <= 4; ++n) {
    GroundFormula g = ground(p.sentence, p.signature, n);
    CHECK(g.atom_count() == p.signature.ground_atom_count(n));
    CHECK(g.atom_count() == static_cast<std::size_t>(n + n * n));
  }
  GroundFormula g2 = ground(p.sentence, p.signature, 2);
  CHECK(g2.atom_name(g2.atom_index(1, 0, 1)) == "R(0,1)");

  Problem eq = problem("forall x forall y (x = y)\n");
  CHECK(oracle_count(eq, 1) == 1);
  CHECK(oracle_count(eq, 2) == 0);

  Problem one = problem("predicate R/2\nforall x exists{=1} y R(x,y)\n");
  OracleReport r = oracle_enumerate(one, 2);
  CHECK(r.models == 4);
  CHECK(r.enumerated == 16);
}

TEST_CASE("ground evaluation agrees with the bit-sliced evaluator") {
  Problem p = problem(
      "predicate A/1\npredicate R/2\n"
      "forall x (A(x) -> exists{=1} y R(x,y)) & exists x !A(x)\n");
  GroundFormula g = ground(p.sentence, p.signature, 2);
  std::size_t N = g.atom_count();
  std::vector<std::uint64_t> lanes(N, 0);
  std::vector<std::vector<bool>> assigns(64, std::vector<bool>(N));
  std::mt19937 rng(3);
  for (int l = 0; l < 64; ++l)
    for (std::size_t a = 0; a < N; ++a) {
      bool b = rng() & 1;
      assigns[l][a] = b;
      if (b) lanes[a] |= 1ULL << l;
    }
  std::vector<std::uint64_t> scratch;
  std::uint64_t mask = g.evaluate64(lanes.data(), scratch);
  for (int l = 0; l < 64; ++l)
    CHECK(((mask >> l) & 1) == g.evaluate(assigns[l]));
}

#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace fo2 {

enum class Var : unsigned char { X = 0, Y = 1 };

inline Var other(Var v) { return v == Var::X ? Var::Y : Var::X; }
inline const char* var_name(Var v) { return v == Var::X ? "x" : "y"; }

enum class Op {
  True,
  False,
  Atom,      // pred(args...)
  Eq,        // args[0] = args[1]
  Not,
  And,       // n-ary
  Or,        // n-ary
  Implies,   // binary
  Iff,       // binary
  Forall,
  Exists,
  CountEq,   // exists{=m}
  CountLe,   // exists{<=m}
  CountGe,   // exists{>=m}
};

struct Node;
using Formula = std::shared_ptr<const Node>;

// Immutable AST node. Build through the factory functions below.
struct Node {
  Op op = Op::True;
  std::string pred;           // Atom
  std::vector<Var> args;      // Atom (1 or 2 terms), Eq (2 terms)
  std::vector<Formula> kids;  // connectives and quantifier bodies
  Var bound = Var::X;         // quantifiers
  int count = 0;              // counting quantifiers

  bool is_quantifier() const {
    return op == Op::Forall || op == Op::Exists || is_counting();
  }
  bool is_counting() const {
    return op == Op::CountEq || op == Op::CountLe || op == Op::CountGe;
  }
};

Formula make_true();
Formula make_false();
Formula make_atom(std::string pred, std::vector<Var> args);
Formula make_eq(Var a, Var b);
Formula make_not(Formula f);
Formula make_and(std::vector<Formula> kids);
Formula make_or(std::vector<Formula> kids);
Formula make_implies(Formula a, Formula b);
Formula make_iff(Formula a, Formula b);
Formula make_quant(Op op, Var bound, Formula body, int count = 0);
inline Formula make_forall(Var v, Formula body) {
  return make_quant(Op::Forall, v, std::move(body));
}
inline Formula make_exists(Var v, Formula body) {
  return make_quant(Op::Exists, v, std::move(body));
}

bool structurally_equal(const Formula& a, const Formula& b);

// Free variables of f.
std::set<Var> free_vars(const Formula& f);
// Every variable occurring anywhere (free or bound).
std::set<Var> all_vars(const Formula& f);
bool is_quantifier_free(const Formula& f);
bool contains_counting(const Formula& f);
// Predicate names in first-occurrence order.
std::vector<std::string> predicates_of(const Formula& f);

// Exchanges x and y everywhere, including binders.
Formula swap_vars(const Formula& f);
// Replaces every occurrence of `from` by `to` in a quantifier-free formula.
Formula substitute(const Formula& f, Var from, Var to);

// Renders in the input grammar; parse(to_string(f)) is structurally equal
// to f.
std::string to_string(const Formula& f);

}  // namespace fo2

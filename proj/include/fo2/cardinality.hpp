#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fo2/number.hpp"

namespace fo2 {

// Arithmetic over predicate cardinalities |P|, the domain size n and exact
// rational constants. Used for cardinality constraints (linear subset) and
// for cardinality-profile weights.
struct NumNode;
using NumExpr = std::shared_ptr<const NumNode>;

enum class NumOp { Const, Card, DomainSize, Neg, Add, Sub, Mul, Div, Pow };

struct NumNode {
  NumOp op = NumOp::Const;
  Rational value;          // Const
  std::string pred;        // Card
  std::vector<NumExpr> kids;
};

NumExpr num_const(Rational v);
NumExpr num_card(std::string pred);
NumExpr num_domain();
NumExpr num_unary(NumOp op, NumExpr a);
NumExpr num_binary(NumOp op, NumExpr a, NumExpr b);

// Counter lookup: cardinality of a predicate in the current profile.
using CardLookup = std::function<long long(const std::string&)>;

// Throws SemanticError on division by zero or a non-integer exponent.
Rational evaluate(const NumExpr& e, const CardLookup& card, int n);
// Predicates referenced through |P|, sorted and unique.
std::vector<std::string> referenced_predicates(const NumExpr& e);
// True iff e is affine in the |P| terms (products/divisions only with a
// constant side, exponentiation only of constants).
bool is_linear(const NumExpr& e);
std::string to_string(const NumExpr& e);

// e = constant + sum(coef[P] * |P|) for a linear e at domain size n.
struct AffineForm {
  std::map<std::string, Rational> coef;  // zero coefficients omitted
  Rational constant;
};
// Throws SemanticError when e is not linear.
AffineForm affine_form(const NumExpr& e, int n);

enum class CmpOp { Eq, Ne, Le, Lt, Ge, Gt };

struct CardNode;
using CardConstraint = std::shared_ptr<const CardNode>;

enum class CardOp { True, Cmp, Not, And, Or };

struct CardNode {
  CardOp op = CardOp::True;
  CmpOp cmp = CmpOp::Eq;
  NumExpr lhs, rhs;
  std::vector<CardConstraint> kids;
};

CardConstraint card_true();
CardConstraint card_cmp(CmpOp op, NumExpr lhs, NumExpr rhs);
CardConstraint card_not(CardConstraint c);
CardConstraint card_and(std::vector<CardConstraint> kids);
CardConstraint card_or(std::vector<CardConstraint> kids);

bool is_trivial(const CardConstraint& c);
bool satisfied(const CardConstraint& c, const CardLookup& card, int n);
std::vector<std::string> referenced_predicates(const CardConstraint& c);
std::string to_string(const CardConstraint& c);

// Largest value `pred` can take in any profile satisfying c, when c is a
// conjunction containing a comparison that bounds |pred| from above by an
// expression of n alone. Returns -1 when no such bound is syntactically
// evident.
long long upper_bound(const CardConstraint& c, const std::string& pred, int n);

}  // namespace fo2

#pragma once

#include <map>
#include <string>
#include <string_view>

#include "fo2/cardinality.hpp"
#include "fo2/formula.hpp"
#include "fo2/number.hpp"
#include "fo2/signature.hpp"

namespace fo2 {

// Weight of a true ground atom (w1) and of a false one (w0).
struct WeightPair {
  Rational w1{1};
  Rational w0{1};
};

// A parsed input file.
struct Problem {
  Signature signature;
  Formula sentence;
  CardConstraint constraint;                  // conjunction of `constraint` lines
  std::map<std::string, WeightPair> weights;  // `weight` lines
  NumExpr profile_weight;                     // `profileweight`, or null
};

struct ParseOptions {
  // Reject atoms over predicates without a `predicate` declaration. When
  // false, arities are inferred from first use.
  bool strict = true;
  // Accept names starting with "__" (reserved for synthetic predicates).
  bool allow_reserved = false;
};

Problem parse_problem(std::string_view text, const ParseOptions& options = {});

// Parses a single sentence against `sig`. With non-strict options the
// signature is extended with inferred predicates.
Formula parse_sentence(std::string_view text, Signature& sig,
                       const ParseOptions& options = {});
CardConstraint parse_constraint(std::string_view text, const Signature& sig);
NumExpr parse_num_expr(std::string_view text, const Signature& sig);

// Renders the problem back into the input grammar.
std::string to_source(const Problem& p);

}  // namespace fo2

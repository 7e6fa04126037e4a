#pragma once

#include <string>
#include <vector>

#include "fo2/cardinality.hpp"
#include "fo2/formula.hpp"
#include "fo2/problem.hpp"
#include "fo2/signature.hpp"

namespace fo2 {

// How A(x) <-> exists{=m} y R(x,y) is made exact.
//  Exclusion: elements outside A are split by a fresh sign predicate B into
//    "unrestricted" (+1) and "exactly m successors" (-1), so the count of
//    rows with a number of successors other than m is obtained by
//    inclusion-exclusion. Exact; the default.
//  Maximize: the original encoding with a per-profile maximality filter on
//    |A|. Kept for comparison; see README for a case where it overcounts.
enum class CountingStrategy { Exclusion, Maximize };

const char* strategy_name(CountingStrategy s);
CountingStrategy parse_strategy(const std::string& name);

struct CountingBlock {
  int index = 0;
  Formula guard;           // R_i(x,y): the counted body, x free, y counted
  int m = 1;
  std::string a;           // A_i
  std::string complement;  // B_i (exclusion only)
  std::vector<std::string> f;
};

struct MaximizeDirective {
  int block = 0;
  std::string a;
  std::vector<std::string> f;
};

struct NormalizedProblem {
  Signature signature;  // user predicates, then synthetic ones
  Formula matrix;       // quantifier-free over x, y
  std::vector<std::string> sign_predicates;  // P_l, in order
  std::vector<Formula> existentials;         // Psi_l matching P_l
  std::vector<CountingBlock> blocks;
  CardConstraint constraint;  // user constraint and induced ones
  std::vector<MaximizeDirective> maximize;
  CountingStrategy strategy = CountingStrategy::Exclusion;

  // Predicates whose cardinality k contributes a factor (-1)^k.
  std::vector<std::string> negative_predicates() const;
  bool is_synthetic(const std::string& pred) const;
};

struct NormalizeOptions {
  CountingStrategy strategy = CountingStrategy::Exclusion;
};

// Rewrites exists{<=m} and exists{>=m} into exists{=k}, and exists{=0} into
// a universal.
Formula expand_counting_sugar(const Formula& f);

// The stages below thread a growing signature; fresh names follow the
// deterministic scheme __P{l}, __A{i}, __B{i}, __f{i}_{j}, plus
// __C{k} (single-variable counting), __D{k} (definitions) and __Z{k}
// (closed subformulas, held as uniform unary predicates).
struct NameSupply {
  int block = 0, sign = 0, def = 0, closed = 0, card = 0;
  std::string next(Signature& sig, const std::string& prefix, int& counter,
                   int arity);
};

struct EncodedCounting {
  Formula sentence;  // no counting quantifiers left
  std::vector<CountingBlock> blocks;
  std::vector<CardConstraint> constraints;
  std::vector<MaximizeDirective> maximize;
};

// Expects only exists{=m} with m >= 1 (run expand_counting_sugar first).
EncodedCounting encode_counting(const Formula& sentence, Signature& sig,
                                NameSupply& names,
                                CountingStrategy strategy);

struct ScottForm {
  Formula matrix;                   // forall x forall y matrix
  std::vector<Formula> existentials;  // forall x exists y Psi_i
};

// Expects a sentence without counting quantifiers.
ScottForm to_scott(const Formula& sentence, Signature& sig, NameSupply& names);

struct SignedMatrix {
  Formula matrix;
  std::vector<std::string> signs;
};

SignedMatrix eliminate_existentials(const ScottForm& scott, Signature& sig,
                                    NameSupply& names);

NormalizedProblem normalize(const Problem& problem,
                            const NormalizeOptions& options = {});

// The normalized problem in the input grammar; sign predicates, blocks and
// directives are listed in comments.
std::string dump(const NormalizedProblem& np);

}  // namespace fo2

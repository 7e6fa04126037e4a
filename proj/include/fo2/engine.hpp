#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fo2/cardinality.hpp"
#include "fo2/cells.hpp"
#include "fo2/normalizer.hpp"
#include "fo2/number.hpp"
#include "fo2/problem.hpp"

namespace fo2 {

// A tracked linear statistic sum(coef * |pred|) of a model. target_* bound
// the final values that matter; the DP may discard anything outside.
struct Counter {
  std::string name;
  std::vector<std::pair<std::string, long long>> terms;
  long long target_lo = std::numeric_limits<long long>::min();
  long long target_hi = std::numeric_limits<long long>::max();
};

enum class EnginePath { Auto, General, Separable };

struct ProfileSpec {
  std::vector<Counter> counters;
  std::map<std::string, WeightPair> weights;  // missing predicates: (1,1)
  bool apply_signs = true;
  // Exclusion blocks: divide by m! per element of A or B by weighting every
  // other element with m! and dividing the total by (m!)^n.
  bool fold_block_divisors = true;
  int threads = 0;  // 0: FO2_THREADS or hardware concurrency
  EnginePath path = EnginePath::Auto;
};

// Signed weighted sums F per counter snapshot. True values are
// values[key] / denominator.
struct ProfileTable {
  std::vector<Counter> counters;
  std::map<std::vector<long long>, Integer> values;
  Integer denominator{1};
  bool separable = false;
};

ProfileTable compute_profiles(const NormalizedProblem& np,
                              const CellStructure& cells, int n,
                              const ProfileSpec& spec);

// --- closed forms over a bare cell structure ---------------------------------

// (n choose k) * prod_{i<=j} n_ij^{k(i,j)}, k indexed by all 2^u 1-types.
// Zero when k uses an invalid 1-type.
Integer universal_term(const CellStructure& cells, const std::vector<int>& k);
// Every k-vector over valid 1-types with its term, in lexicographic order.
std::vector<std::pair<std::vector<int>, Integer>> universal_terms(
    const CellStructure& cells, int n);
Integer fomc_universal(const CellStructure& cells, int n);

// --- counting queries ---------------------------------------------------------

struct CountRequest {
  std::vector<std::string> track;          // reported per profile
  CardConstraint extra;                    // conjoined with the problem's
  std::map<std::string, WeightPair> weights;
  NumExpr profile_weight;                  // null: weight 1
  int threads = 0;
  EnginePath path = EnginePath::Auto;
};

struct CountResult {
  Rational total;
  std::vector<std::string> tracked;
  // Per snapshot of the tracked cardinalities: the (symmetric-)weighted
  // count before the profile weight is applied.
  std::vector<std::pair<std::vector<long long>, Rational>> profiles;
  bool separable = false;
};

CountResult count(const NormalizedProblem& np, int n,
                  const CountRequest& request = {});

// Sign-corrected Scott-form count; no constraint, no blocks.
Integer fomc_scott(const NormalizedProblem& np, int n);
// Count under the problem's constraint and blocks (the full pipeline).
Integer fomc(const NormalizedProblem& np, int n);
Integer fomc_constrained(const NormalizedProblem& np, int n,
                         const CardConstraint& rho);

// For a problem with exactly one sign predicate P: p_m counts models of the
// matrix (signs ignored) with |P| = m; e_m is the alternating sum
// sum_{k>=m} (-1)^{k-m} C(k,m) p_k.
struct LemmaEm {
  Integer p;
  Integer e;
};
LemmaEm lemma_em_diagnostic(const NormalizedProblem& np, int n, int m);

int default_threads();

}  // namespace fo2

#pragma once

#include <map>
#include <string>
#include <vector>

#include "fo2/engine.hpp"
#include "fo2/normalizer.hpp"

namespace fo2 {

using SymmetricWeights = std::map<std::string, WeightPair>;

// Symmetric per-predicate weights and a cardinality-profile weight, applied
// together (either may be empty).
struct WeightSpec {
  SymmetricWeights symmetric;
  NumExpr profile;
};

Rational wfomc(const NormalizedProblem& np, int n, const WeightSpec& weights,
               const CardConstraint& rho = nullptr, int threads = 0);

// Weights folded into the cell values; no counters needed.
Rational wfomc_symmetric(const NormalizedProblem& np, int n,
                         const SymmetricWeights& weights, int threads = 0);

// Same quantity through per-predicate cardinality profiles and the explicit
// product w1^{|P|} * w0^{N_P - |P|}; used to cross-check the folding.
Rational wfomc_symmetric_by_profiles(const NormalizedProblem& np, int n,
                                     const SymmetricWeights& weights,
                                     int threads = 0);

// Sum over profiles satisfying rho of weight(profile) * F.
Rational wfomc_profile(const NormalizedProblem& np, int n,
                       const NumExpr& weight, const CardConstraint& rho = nullptr,
                       int threads = 0);

struct Probability {
  Rational numerator;
  Rational partition;  // Z
  Rational value;      // numerator / Z
};

// Probability that a model drawn with the given weight satisfies `query`.
// Throws SemanticError when Z = 0.
Probability count_distribution(const NormalizedProblem& np, int n,
                               const WeightSpec& weights,
                               const CardConstraint& query, int threads = 0);

struct DistributionRow {
  std::vector<long long> counts;  // cardinalities of the query predicates
  Rational probability;
};

// Full distribution over the cardinalities of `preds`, zero rows included
// for every combination in [0, N_P] (ordered lexicographically).
std::vector<DistributionRow> distribution_table(
    const NormalizedProblem& np, int n, const WeightSpec& weights,
    const std::vector<std::string>& preds, Rational* partition = nullptr,
    int threads = 0);

}  // namespace fo2

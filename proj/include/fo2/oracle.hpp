#pragma once

#include <map>
#include <string>
#include <vector>

#include "fo2/cells.hpp"
#include "fo2/number.hpp"
#include "fo2/problem.hpp"

namespace fo2 {

struct OracleOptions {
  int cap = 28;     // maximum number of ground atoms
  int threads = 0;  // 0: default_threads()
  // When non-empty, models are also stratified by the census of 1-types
  // over these slots (same bit convention as CellStructure).
  std::vector<UnarySlot> census_slots;
};

struct OracleReport {
  int n = 0;
  Integer models;      // satisfying assignments meeting the constraint
  Integer enumerated;  // assignments visited
  std::vector<std::string> predicates;  // signature order
  // Models by the cardinality of every predicate (signature order).
  std::map<std::vector<long long>, Integer> by_cardinality;
  // Models by 1-type census (only with census_slots).
  std::map<std::vector<int>, Integer> by_census;
};

// Enumerates every assignment of the ground atoms and evaluates the
// original sentence directly, counting quantifiers included; the
// problem's constraint is applied to ground cardinalities.
OracleReport oracle_enumerate(const Problem& problem, int n,
                              const OracleOptions& options = {});

// Weight of any model with per-predicate cardinalities k (signature order).
Rational oracle_model_weight(const Problem& problem,
                             const std::map<std::string, WeightPair>& weights,
                             const NumExpr& profile_weight,
                             const std::vector<long long>& k, int n);

// Sum over models meeting `extra` of the symmetric weight times the profile
// weight (either may be absent).
Rational oracle_weighted(const OracleReport& report, const Problem& problem,
                         const std::map<std::string, WeightPair>& weights,
                         const NumExpr& profile_weight,
                         const CardConstraint& extra = nullptr);

Integer oracle_count(const Problem& problem, int n,
                     const OracleOptions& options = {});

}  // namespace fo2

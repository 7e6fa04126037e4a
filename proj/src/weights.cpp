#include "fo2/weights.hpp"

#include <functional>

#include "fo2/errors.hpp"

namespace fo2 {

namespace {

long long atom_count(const Signature& sig, const std::string& p, int n) {
  return sig.arity(p) == 1 ? n : static_cast<long long>(n) * n;
}

Rational rpow(const Rational& base, long long e) {
  if (e == 0) return Rational(1);
  Integer num = ipow(base.get_num(), static_cast<unsigned long>(e));
  Integer den = ipow(base.get_den(), static_cast<unsigned long>(e));
  Rational r(num, den);
  r.canonicalize();
  return r;
}

void check_weights(const NormalizedProblem& np, const SymmetricWeights& w) {
  for (const auto& [p, pair] : w)
    if (!np.signature.contains(p))
      throw SemanticError("weight for unknown predicate " + p);
}

}  // namespace

Rational wfomc_symmetric(const NormalizedProblem& np, int n,
                         const SymmetricWeights& weights, int threads) {
  check_weights(np, weights);
  CountRequest req;
  req.weights = weights;
  req.threads = threads;
  return count(np, n, req).total;
}

Rational wfomc_symmetric_by_profiles(const NormalizedProblem& np, int n,
                                     const SymmetricWeights& weights,
                                     int threads) {
  check_weights(np, weights);
  CountRequest req;
  req.threads = threads;
  for (const auto& [p, w] : weights) req.track.push_back(p);
  CountResult r = count(np, n, req);
  Rational total;
  for (const auto& [key, value] : r.profiles) {
    Rational w(1);
    for (std::size_t i = 0; i < r.tracked.size(); ++i) {
      const std::string& p = r.tracked[i];
      const WeightPair& wp = weights.at(p);
      w *= rpow(wp.w1, key[i]) *
           rpow(wp.w0, atom_count(np.signature, p, n) - key[i]);
    }
    total += w * value;
  }
  total.canonicalize();
  return total;
}

Rational wfomc(const NormalizedProblem& np, int n, const WeightSpec& weights,
               const CardConstraint& rho, int threads) {
  check_weights(np, weights.symmetric);
  CountRequest req;
  req.weights = weights.symmetric;
  req.profile_weight = weights.profile;
  req.extra = rho;
  req.threads = threads;
  return count(np, n, req).total;
}

Rational wfomc_profile(const NormalizedProblem& np, int n,
                       const NumExpr& weight, const CardConstraint& rho,
                       int threads) {
  return wfomc(np, n, {{}, weight}, rho, threads);
}

Probability count_distribution(const NormalizedProblem& np, int n,
                               const WeightSpec& weights,
                               const CardConstraint& query, int threads) {
  Probability p;
  p.partition = wfomc(np, n, weights, nullptr, threads);
  if (p.partition == 0)
    throw SemanticError("partition function Z is zero at n=" +
                        std::to_string(n));
  p.numerator = wfomc(np, n, weights, query, threads);
  p.value = p.numerator / p.partition;
  p.value.canonicalize();
  return p;
}

std::vector<DistributionRow> distribution_table(
    const NormalizedProblem& np, int n, const WeightSpec& weights,
    const std::vector<std::string>& preds, Rational* partition, int threads) {
  check_weights(np, weights.symmetric);
  const NumExpr& weight = weights.profile;
  CountRequest req;
  req.weights = weights.symmetric;
  req.profile_weight = weight;
  req.threads = threads;
  req.track = preds;
  CountResult r = count(np, n, req);
  if (r.total == 0)
    throw SemanticError("partition function Z is zero at n=" +
                        std::to_string(n));
  if (partition) *partition = r.total;
  // Weighted mass per snapshot of the query predicates.
  std::map<std::vector<long long>, Rational> mass;
  for (const auto& [key, value] : r.profiles) {
    Rational w(1);
    if (weight)
      w = evaluate(
          weight,
          [&](const std::string& p) -> long long {
            for (std::size_t i = 0; i < r.tracked.size(); ++i)
              if (r.tracked[i] == p) return key[i];
            throw SemanticError("untracked predicate " + p);
          },
          n);
    std::vector<long long> k(key.begin(), key.begin() + preds.size());
    mass[k] += w * value;
  }
  std::vector<DistributionRow> rows;
  std::vector<long long> k(preds.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == preds.size()) {
      Rational v = mass.count(k) ? mass[k] / r.total : Rational(0);
      v.canonicalize();
      rows.push_back({k, v});
      return;
    }
    long long top = atom_count(np.signature, preds[d], n);
    for (long long c = 0; c <= top; ++c) {
      k[d] = c;
      rec(d + 1);
    }
    k[d] = 0;
  };
  rec(0);
  return rows;
}

}  // namespace fo2

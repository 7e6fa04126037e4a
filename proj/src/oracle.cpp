#include "fo2/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <thread>

#include "fo2/engine.hpp"
#include "fo2/errors.hpp"
#include "fo2/eval.hpp"

namespace fo2 {

namespace {

// Lane l of kLanePattern[a] is bit a of l.
constexpr std::uint64_t kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

}  // namespace

OracleReport oracle_enumerate(const Problem& problem, int n,
                              const OracleOptions& options) {
  if (n < 1) throw SemanticError("domain size must be at least 1");
  unsigned long long atoms = problem.signature.ground_atom_count(n);
  if (atoms > static_cast<unsigned long long>(options.cap) || atoms > 62)
    throw UnsupportedError("oracle: " + std::to_string(atoms) +
                           " ground atoms at n=" + std::to_string(n) +
                           " exceed the cap of " +
                           std::to_string(options.cap) +
                           " (2^atoms assignments)");
  GroundFormula g = ground(problem.sentence, problem.signature, n);
  const auto& preds = problem.signature.predicates();
  int low = static_cast<int>(std::min<unsigned long long>(atoms, 6));
  int high = static_cast<int>(atoms) - low;
  std::uint64_t lane_mask = low == 6 ? ~0ULL : ((1ULL << (1 << low)) - 1);

  // Per predicate: which low (lane) and high bits hold its atoms.
  std::vector<std::uint64_t> low_mask(preds.size(), 0), high_mask(preds.size(), 0);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    std::size_t count = preds[p].arity == 1 ? n : static_cast<std::size_t>(n) * n;
    for (std::size_t a = g.offset(p); a < g.offset(p) + count; ++a) {
      if (static_cast<int>(a) < low) {
        low_mask[p] |= 1ULL << a;
      } else {
        high_mask[p] |= 1ULL << (a - low);
      }
    }
  }
  // Census slots resolved to atom indices per element.
  struct SlotAtoms {
    std::vector<std::size_t> atom;  // per element
  };
  std::vector<SlotAtoms> census;
  for (const auto& s : options.census_slots) {
    std::size_t p = 0;
    while (p < preds.size() && preds[p].name != s.pred) ++p;
    if (p == preds.size()) throw SemanticError("unknown census slot " + s.pred);
    SlotAtoms sa;
    for (int c = 0; c < n; ++c)
      sa.atom.push_back(preds[p].arity == 1 ? g.atom_index(p, c)
                                            : g.atom_index(p, c, c));
    census.push_back(std::move(sa));
  }
  int u = static_cast<int>(census.size());

  struct Partial {
    std::map<std::vector<long long>, Integer> by_card;
    std::map<std::vector<int>, Integer> by_census;
  };
  int threads = options.threads > 0 ? options.threads : default_threads();
  unsigned long long chunks = 1ULL << high;
  threads = static_cast<int>(std::min<unsigned long long>(threads, chunks));
  threads = std::max(threads, 1);
  std::vector<Partial> partial(threads);
  std::atomic<unsigned long long> next{0};
  constexpr unsigned long long kBatch = 256;

  auto worker = [&](int w) {
    std::vector<std::uint64_t> words(atoms), scratch;
    for (int a = 0; a < low; ++a) words[a] = kLanePattern[a];
    std::map<std::vector<long long>, unsigned long long> card_local;
    std::map<std::vector<int>, unsigned long long> census_local;
    std::vector<long long> key(preds.size());
    std::vector<int> ck(u > 0 ? (1 << u) : 0);
    for (;;) {
      unsigned long long start = next.fetch_add(kBatch);
      if (start >= chunks) break;
      unsigned long long end = std::min(chunks, start + kBatch);
      for (unsigned long long h = start; h < end; ++h) {
        for (int a = 0; a < high; ++a)
          words[low + a] = ((h >> a) & 1) ? ~0ULL : 0ULL;
        std::uint64_t sat = g.evaluate64(words.data(), scratch) & lane_mask;
        while (sat) {
          int l = std::countr_zero(sat);
          sat &= sat - 1;
          for (std::size_t p = 0; p < preds.size(); ++p)
            key[p] = std::popcount(h & high_mask[p]) +
                     std::popcount(static_cast<std::uint64_t>(l) & low_mask[p]);
          ++card_local[key];
          if (u > 0) {
            std::fill(ck.begin(), ck.end(), 0);
            for (int c = 0; c < n; ++c) {
              int type = 0;
              for (int k = 0; k < u; ++k) {
                std::size_t a = census[k].atom[c];
                bool bit = static_cast<int>(a) < low ? (l >> a) & 1
                                                    : (h >> (a - low)) & 1;
                type = (type << 1) | bit;
              }
              ++ck[type];
            }
            ++census_local[ck];
          }
        }
      }
    }
    for (const auto& [k, v] : card_local)
      partial[w].by_card[k] += Integer(static_cast<unsigned long>(v));
    for (const auto& [k, v] : census_local)
      partial[w].by_census[k] += Integer(static_cast<unsigned long>(v));
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  OracleReport report;
  report.n = n;
  report.enumerated = ipow(Integer(2), atoms);
  for (const auto& p : preds) report.predicates.push_back(p.name);
  std::map<std::vector<long long>, Integer> by_card;
  for (const auto& part : partial) {
    for (const auto& [k, v] : part.by_card) by_card[k] += v;
    for (const auto& [k, v] : part.by_census) report.by_census[k] += v;
  }
  // Apply the problem's constraint on ground cardinalities.
  bool constrained = problem.constraint && !is_trivial(problem.constraint);
  if (constrained && !report.by_census.empty())
    throw SemanticError("census stratification ignores constraints; "
                        "use a problem without one");
  for (const auto& [k, v] : by_card) {
    if (constrained &&
        !satisfied(
            problem.constraint,
            [&](const std::string& name) -> long long {
              for (std::size_t p = 0; p < preds.size(); ++p)
                if (preds[p].name == name) return k[p];
              throw SemanticError("unknown predicate " + name);
            },
            n))
      continue;
    report.by_cardinality[k] = v;
    report.models += v;
  }
  return report;
}

Rational oracle_model_weight(const Problem& problem,
                            const std::map<std::string, WeightPair>& weights,
                            const NumExpr& profile_weight,
                            const std::vector<long long>& k, int n) {
  const auto& preds = problem.signature.predicates();
  auto lookup = [&](const std::string& name) -> long long {
    for (std::size_t p = 0; p < preds.size(); ++p)
      if (preds[p].name == name) return k[p];
    throw SemanticError("unknown predicate " + name);
  };
  Rational w(1);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    auto it = weights.find(preds[p].name);
    if (it == weights.end()) continue;
    long long all = preds[p].arity == 1 ? n : static_cast<long long>(n) * n;
    Integer num1 = ipow(it->second.w1.get_num(), k[p]);
    Integer den1 = ipow(it->second.w1.get_den(), k[p]);
    Integer num0 = ipow(it->second.w0.get_num(), all - k[p]);
    Integer den0 = ipow(it->second.w0.get_den(), all - k[p]);
    Rational part(num1 * num0, den1 * den0);
    part.canonicalize();
    w *= part;
  }
  if (profile_weight) w *= evaluate(profile_weight, lookup, n);
  return w;
}

Rational oracle_weighted(const OracleReport& report, const Problem& problem,
                         const std::map<std::string, WeightPair>& weights,
                         const NumExpr& profile_weight,
                         const CardConstraint& extra) {
  const auto& preds = problem.signature.predicates();
  int n = report.n;
  Rational total;
  for (const auto& [k, count] : report.by_cardinality) {
    auto lookup = [&](const std::string& name) -> long long {
      for (std::size_t p = 0; p < preds.size(); ++p)
        if (preds[p].name == name) return k[p];
      throw SemanticError("unknown predicate " + name);
    };
    if (extra && !satisfied(extra, lookup, n)) continue;
    total += oracle_model_weight(problem, weights, profile_weight, k, n) *
             Rational(count);
  }
  total.canonicalize();
  return total;
}

Integer oracle_count(const Problem& problem, int n,
                     const OracleOptions& options) {
  return oracle_enumerate(problem, n, options).models;
}

}  // namespace fo2

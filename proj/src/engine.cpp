#include "fo2/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "fo2/errors.hpp"
#include "fo2/poly.hpp"

namespace fo2 {

int default_threads() {
  if (const char* env = std::getenv("FO2_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

using Key = std::vector<long long>;
using Table = std::map<Key, Integer>;
constexpr long long kNegInf = std::numeric_limits<long long>::min();
constexpr long long kPosInf = std::numeric_limits<long long>::max();

long long clamp128(__int128 v) {
  if (v < static_cast<__int128>(kNegInf) / 4) return kNegInf / 4;
  if (v > static_cast<__int128>(kPosInf) / 4) return kPosInf / 4;
  return static_cast<long long>(v);
}

// a - b*c with saturation; infinite targets stay effectively infinite.
long long sub_mul(long long a, long long b, long long c) {
  if (a == kNegInf || a == kPosInf) return a;
  return clamp128(static_cast<__int128>(a) - static_cast<__int128>(b) * c);
}

void merge(Table& into, const Table& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

// Runs tasks 0..count-1 on up to `threads` workers, each with its own table.
Table run_parallel(int count, int threads,
                   const std::function<void(int, Table&)>& task) {
  threads = std::max(1, std::min(threads, count));
  std::vector<Table> partial(threads);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](int w) {
    try {
      for (int t; (t = next.fetch_add(1)) < count;) task(t, partial[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  // Exact integer addition: the merge order does not affect the result.
  Table out;
  for (const auto& p : partial) merge(out, p);
  return out;
}

struct Scaled {
  std::map<std::string, std::pair<Integer, Integer>> w;  // (true, false)
  Integer denominator{1};

  const std::pair<Integer, Integer>* find(const std::string& p) const {
    auto it = w.find(p);
    return it == w.end() ? nullptr : &it->second;
  }
  Integer factor(const std::string& p, bool value) const {
    const auto* pw = find(p);
    if (!pw) return Integer(1);
    return value ? pw->first : pw->second;
  }
};

Scaled scale_weights(const Signature& sig,
                     const std::map<std::string, WeightPair>& weights, int n) {
  Scaled s;
  for (const auto& [name, wp] : weights) {
    const Predicate* p = sig.find(name);
    if (!p) throw SemanticError("weight for unknown predicate " + name);
    if (wp.w1 == 1 && wp.w0 == 1) continue;
    Integer d;
    mpz_lcm(d.get_mpz_t(), wp.w1.get_den_mpz_t(), wp.w0.get_den_mpz_t());
    Rational t = wp.w1 * Rational(d), f = wp.w0 * Rational(d);
    s.w[name] = {t.get_num(), f.get_num()};
    unsigned long atoms = p->arity == 1 ? n : static_cast<unsigned long>(n) * n;
    s.denominator *= ipow(d, atoms);
  }
  return s;
}

// Shared per-1-type data for both evaluation paths.
struct Prepared {
  std::vector<int> types;                  // valid 1-types
  std::vector<Integer> weight;             // sign * weight * fold factor
  std::vector<std::vector<long long>> cu;  // [counter][type position]
  std::vector<int> bin_dim;                // counter -> binary dim, or -1
  int bin_dims = 0;
  Scaled scaled;
};

Prepared prepare(const NormalizedProblem& np, const CellStructure& cells,
                 int n, const ProfileSpec& spec) {
  Prepared pr;
  pr.scaled = scale_weights(np.signature, spec.weights, n);
  std::vector<int> negative;
  if (spec.apply_signs)
    for (const auto& p : np.negative_predicates())
      negative.push_back(cells.unary_slot(p));
  struct Fold {
    int a, b;
    Integer factor;
  };
  std::vector<Fold> folds;
  if (spec.fold_block_divisors) {
    for (const auto& blk : np.blocks) {
      if (blk.complement.empty() || blk.m < 2) continue;
      Integer f = factorial(blk.m);
      folds.push_back(
          {cells.unary_slot(blk.a), cells.unary_slot(blk.complement), f});
      pr.scaled.denominator *= ipow(f, n);
    }
  }
  for (const auto& c : spec.counters)
    for (const auto& [p, coef] : c.terms)
      if (cells.unary_slot(p) < 0)
        throw SemanticError("counter over unknown predicate " + p);

  pr.types = cells.valid_types();
  for (int t : pr.types) {
    Integer w(1);
    int neg = 0;
    for (int s : negative) neg += cells.unary_bit(t, s);
    if (neg & 1) w = -w;
    for (int k = 0; k < cells.u(); ++k)
      w *= pr.scaled.factor(cells.unary_slots()[k].pred,
                            cells.unary_bit(t, k));
    for (const auto& f : folds)
      if (!cells.unary_bit(t, f.a) && !cells.unary_bit(t, f.b)) w *= f.factor;
    pr.weight.push_back(w);
  }
  for (const auto& c : spec.counters) {
    std::vector<long long> row;
    bool binary = false;
    for (int t : pr.types) {
      long long v = 0;
      for (const auto& [p, coef] : c.terms)
        v += coef * cells.unary_bit(t, cells.unary_slot(p));
      row.push_back(v);
    }
    for (const auto& [p, coef] : c.terms)
      if (cells.binary_slot(p, false) >= 0) binary = true;
    pr.cu.push_back(std::move(row));
    pr.bin_dim.push_back(binary ? pr.bin_dims++ : -1);
  }
  return pr;
}

// Contribution of a 2-table (both orientations) to counter c.
long long pair_contribution(const CellStructure& cells, const Counter& c,
                            int v) {
  long long total = 0;
  for (const auto& [p, coef] : c.terms) {
    int fwd = cells.binary_slot(p, false);
    if (fwd < 0) continue;
    total += coef * (cells.binary_bit(v, fwd) + cells.binary_bit(v, fwd + 1));
  }
  return total;
}

// --- general path: k-vector recursion ----------------------------------------

class GeneralDP {
 public:
  GeneralDP(const CellStructure& cells, int n, const ProfileSpec& spec,
            const Prepared& pr)
      : cells_(cells), n_(n), spec_(spec), pr_(pr) {
    std::size_t T = pr.types.size(), C = spec.counters.size();
    scalar_ = pr.bin_dims == 0;
    // Binary parts of counters: off-diagonal atoms only.
    long long offdiag = static_cast<long long>(n) * (n - 1);
    blo_.assign(pr.bin_dims, 0);
    bhi_.assign(pr.bin_dims, 0);
    for (std::size_t c = 0; c < C; ++c) {
      int d = pr.bin_dim[c];
      if (d < 0) continue;
      bool all_pos = true, all_neg = true;
      for (const auto& [p, coef] : spec.counters[c].terms) {
        if (cells.binary_slot(p, false) < 0) continue;
        (coef < 0 ? blo_[d] : bhi_[d]) += coef * offdiag;
        if (coef < 0) all_pos = false;
        if (coef > 0) all_neg = false;
      }
      const Counter& ct = spec.counters[c];
      long long umin = 0, umax = 0;
      if (T > 0) {
        umin = *std::min_element(pr.cu[c].begin(), pr.cu[c].end()) * n;
        umax = *std::max_element(pr.cu[c].begin(), pr.cu[c].end()) * n;
      }
      nonneg_.push_back(all_pos);
      // Monotone counters can be truncated at the target.
      if (all_pos && ct.target_hi != kPosInf)
        bhi_[d] = std::min(bhi_[d], ct.target_hi - umin);
      if (all_neg && ct.target_lo != kNegInf)
        blo_[d] = std::max(blo_[d], ct.target_lo - umax);
    }
    for (int d = 0; d < pr.bin_dims; ++d)
      if (blo_[d] > bhi_[d]) empty_ = true;

    // Pair tables r_st over the valid 1-types.
    rs_.assign(T, std::vector<Integer>(T));
    if (!scalar_) rp_.assign(T, std::vector<Poly>(T));
    std::vector<Integer> wv(cells.num_tables());
    for (int v = 0; v < cells.num_tables(); ++v) {
      Integer w(1);
      for (int l = 0; l < cells.b(); ++l)
        w *= pr.scaled.factor(cells.binary_slots()[l].pred,
                              cells.binary_bit(v, l));
      wv[v] = w;
    }
    for (std::size_t s = 0; s < T; ++s) {
      for (std::size_t t = s; t < T; ++t) {
        int i = pr.types[s], j = pr.types[t];
        if (scalar_) {
          Integer r(0);
          cells.for_each_table(i, j, [&](int v) { r += wv[v]; });
          rs_[s][t] = r;
        } else {
          Poly r(blo_, bhi_);
          Poly::Exps e(pr.bin_dims);
          cells.for_each_table(i, j, [&](int v) {
            for (std::size_t c = 0; c < C; ++c)
              if (pr.bin_dim[c] >= 0)
                e[pr.bin_dim[c]] =
                    pair_contribution(cells, spec.counters[c], v);
            r.add(e, wv[v]);
          });
          rs_[s][t] = r.is_zero() ? 0 : 1;
          rp_[s][t] = std::move(r);
        }
      }
    }
    merge_equivalent_types();
    T = weight_.size();
    // Suffix bounds of unary contributions, for pruning.
    sufmin_.assign(C, std::vector<long long>(T + 1, 0));
    sufmax_.assign(C, std::vector<long long>(T + 1, 0));
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t t = T; t-- > 0;) {
        long long v = cu_[c][t];
        sufmin_[c][t] = t + 1 == T ? v : std::min(v, sufmin_[c][t + 1]);
        sufmax_[c][t] = t + 1 == T ? v : std::max(v, sufmax_[c][t + 1]);
      }
    }
  }

  // Types whose pair factors agree with every type (themselves and each
  // other included) and whose counter contributions agree are
  // interchangeable: by the multinomial theorem a class behaves as one type
  // whose weight is the sum of the members' weights. Classes whose weights
  // cancel drop out.
  void merge_equivalent_types() {
    std::size_t T = pr_.types.size(), C = spec_.counters.size();
    weight_ = pr_.weight;
    cu_ = pr_.cu;
    auto same_pair = [&](std::size_t a, std::size_t b, std::size_t c,
                         std::size_t d) {
      auto [s1, t1] = std::minmax(a, b);
      auto [s2, t2] = std::minmax(c, d);
      if (scalar_) return rs_[s1][t1] == rs_[s2][t2];
      return rp_[s1][t1] == rp_[s2][t2];
    };
    auto equivalent = [&](std::size_t a, std::size_t b) {
      for (std::size_t c = 0; c < C; ++c)
        if (cu_[c][a] != cu_[c][b]) return false;
      for (std::size_t u = 0; u < T; ++u)
        if (!same_pair(a, u, b, u)) return false;
      return true;
    };
    std::vector<std::size_t> rep;  // class representatives
    std::vector<Integer> total;
    for (std::size_t t = 0; t < T; ++t) {
      bool placed = false;
      for (std::size_t k = 0; k < rep.size() && !placed; ++k)
        if (equivalent(rep[k], t)) {
          total[k] += weight_[t];
          placed = true;
        }
      if (!placed) {
        rep.push_back(t);
        total.push_back(weight_[t]);
      }
    }
    std::vector<std::size_t> keep;
    std::vector<Integer> w;
    for (std::size_t k = 0; k < rep.size(); ++k)
      if (sgn(total[k]) != 0) {
        keep.push_back(rep[k]);
        w.push_back(total[k]);
      }
    if (keep.size() == T) return;
    std::size_t K = keep.size();
    std::vector<std::vector<Integer>> rs(K, std::vector<Integer>(K));
    std::vector<std::vector<Poly>> rp;
    if (!scalar_) rp.assign(K, std::vector<Poly>(K));
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = a; b < K; ++b) {
        auto [s, t] = std::minmax(keep[a], keep[b]);
        rs[a][b] = rs_[s][t];
        if (!scalar_) rp[a][b] = rp_[s][t];
      }
    std::vector<std::vector<long long>> cu(C);
    for (std::size_t c = 0; c < C; ++c)
      for (auto t : keep) cu[c].push_back(cu_[c][t]);
    rs_ = std::move(rs);
    rp_ = std::move(rp);
    cu_ = std::move(cu);
    weight_ = std::move(w);
  }

  Table run(int threads) {
    std::size_t T = weight_.size();
    if (T == 0 || empty_) return {};
    // Jobs: the first 1-type with a positive count.
    return run_parallel(static_cast<int>(T), threads, [&](int t, Table& out) {
      State st = initial();
      for (int c = 1; c <= n_; ++c) place(st, static_cast<std::size_t>(t), c, n_, out);
    });
  }

 private:
  // Only the 1-types with a positive count are recorded; all others are 0.
  struct State {
    Integer scalar{1};
    Poly poly;
    std::vector<long long> unary;
    std::vector<std::pair<std::size_t, int>> ks;
  };

  State initial() const {
    State st;
    if (!scalar_) st.poly = Poly::constant(Integer(1), pr_.bin_dims);
    st.unary.assign(spec_.counters.size(), 0);
    return st;
  }

  // Can the counters still reach their targets with `remaining` elements
  // spread over the types after position t?
  bool feasible(const State& st, std::size_t t, int remaining) const {
    std::size_t T = weight_.size();
    if (remaining > 0 && t + 1 >= T) return false;
    for (std::size_t c = 0; c < spec_.counters.size(); ++c) {
      const Counter& ct = spec_.counters[c];
      if (ct.target_lo == kNegInf && ct.target_hi == kPosInf) continue;
      long long lo = st.unary[c], hi = st.unary[c];
      if (remaining > 0) {
        lo += remaining * sufmin_[c][t + 1];
        hi += remaining * sufmax_[c][t + 1];
      }
      int d = pr_.bin_dim[c];
      if (d >= 0) {
        lo += blo_[d];
        hi += bhi_[d];
      }
      if (hi < ct.target_lo || lo > ct.target_hi) return false;
    }
    return true;
  }

  // Gives c of the `remaining` elements the type at position t, then
  // distributes the rest over later types.
  void place(const State& st, std::size_t t, int c, int remaining,
             Table& out) {
    std::size_t T = weight_.size();
    unsigned long same = static_cast<unsigned long>(c) * (c - 1) / 2;
    if (same > 0 && sgn(rs_[t][t]) == 0) return;
    for (const auto& [s, k] : st.ks)
      if (sgn(rs_[s][t]) == 0) return;
    State next;
    next.unary = st.unary;
    next.ks = st.ks;
    Integer factor = binomial(remaining, c);
    Integer w;
    mpz_pow_ui(w.get_mpz_t(), weight_[t].get_mpz_t(), c);
    factor *= w;
    for (std::size_t k = 0; k < spec_.counters.size(); ++k)
      next.unary[k] += static_cast<long long>(c) * cu_[k][t];
    int rest = remaining - c;
    if (!feasible(next, t, rest)) return;
    if (scalar_) {
      Integer p;
      mpz_pow_ui(p.get_mpz_t(), rs_[t][t].get_mpz_t(), same);
      factor *= p;
      for (const auto& [s, k] : st.ks) {
        mpz_pow_ui(p.get_mpz_t(), rs_[s][t].get_mpz_t(),
                   static_cast<unsigned long>(k) * c);
        factor *= p;
      }
      next.scalar = st.scalar * factor;
    } else {
      // Windows: once every element is placed the counters are known up
      // to their binary parts, which pins those to the targets.
      Poly::Exps plo = blo_, phi = bhi_, flo = blo_, fhi = bhi_;
      if (rest == 0) {
        for (std::size_t k = 0; k < spec_.counters.size(); ++k) {
          int d = pr_.bin_dim[k];
          if (d < 0) continue;
          const Counter& ct = spec_.counters[k];
          if (ct.target_lo != kNegInf)
            flo[d] = std::max(flo[d], ct.target_lo - next.unary[k]);
          if (ct.target_hi != kPosInf)
            fhi[d] = std::min(fhi[d], ct.target_hi - next.unary[k]);
          if (flo[d] > fhi[d]) return;
          if (nonneg_[d]) phi[d] = fhi[d];
        }
      }
      std::size_t factors = st.ks.size() + (same > 0 ? 1 : 0), done = 0;
      const Poly* cur = &st.poly;
      Poly acc;
      auto mul = [&](const Poly& f) {
        bool last = ++done == factors;
        acc = cur->multiply(f, last ? flo : plo, last ? fhi : phi);
        cur = &acc;
      };
      if (same > 0) mul(power_of(t, t, same));
      for (const auto& [s, k] : st.ks)
        mul(power_of(s, t, static_cast<unsigned long>(k) * c));
      if (cur != &acc) acc = *cur;
      acc.scale(factor);
      if (acc.is_zero()) return;
      next.poly = std::move(acc);
    }
    if (rest == 0) {
      emit(next, out);
      return;
    }
    next.ks.emplace_back(t, c);
    for (std::size_t t2 = t + 1; t2 < T; ++t2)
      for (int c2 = 1; c2 <= rest; ++c2) place(next, t2, c2, rest, out);
  }

  void emit(const State& st, Table& out) const {
    if (scalar_) {
      if (sgn(st.scalar) != 0) out[st.unary] += st.scalar;
      return;
    }
    st.poly.for_each([&](const Poly::Exps& e, const Integer& coef) {
      Key key = st.unary;
      for (std::size_t c = 0; c < key.size(); ++c)
        if (pr_.bin_dim[c] >= 0) key[c] += e[pr_.bin_dim[c]];
      out[key] += coef;
    });
  }

  // r_st^e, truncated to the counter window. Cached; entries are never
  // erased, so the returned reference stays valid.
  const Poly& power_of(std::size_t s, std::size_t t, unsigned long e) {
    if (e == 1) return rp_[s][t];
    auto key = std::make_tuple(s, t, e);
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    Poly p = power(rp_[s][t], e, [&](unsigned long, Poly::Exps& lo,
                                     Poly::Exps& hi) {
      lo = blo_;
      hi = bhi_;
    });
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(key, std::move(p)).first->second;
  }

  const CellStructure& cells_;
  int n_;
  const ProfileSpec& spec_;
  const Prepared& pr_;
  bool scalar_ = true;
  bool empty_ = false;
  Poly::Exps blo_, bhi_;
  std::vector<char> nonneg_;  // per binary dim: pair exponents are >= 0
  std::vector<Integer> weight_;             // per (merged) type
  std::vector<std::vector<long long>> cu_;  // [counter][merged type]
  std::vector<std::vector<Integer>> rs_;
  std::vector<std::vector<Poly>> rp_;
  std::vector<std::vector<long long>> sufmin_, sufmax_;
  std::mutex cache_mutex_;
  std::map<std::tuple<std::size_t, std::size_t, unsigned long>, Poly> cache_;
};

// --- separable path: (sum over 1-types of an element polynomial)^n ----------

Table separable_profiles(const CellStructure& cells, int n,
                         const ProfileSpec& spec, const Prepared& pr) {
  std::size_t C = spec.counters.size();
  int nb = cells.num_binary_preds();
  int rows = 1 << nb;
  // Per forward row: weight and counter contributions.
  std::vector<Integer> wr(rows);
  std::vector<std::vector<long long>> cr(rows, std::vector<long long>(C, 0));
  for (int row = 0; row < rows; ++row) {
    Integer w(1);
    for (int p = 0; p < nb; ++p) {
      bool bit = (row >> (nb - 1 - p)) & 1;
      const std::string& pred = cells.binary_slots()[2 * p].pred;
      w *= pr.scaled.factor(pred, bit);
      if (!bit) continue;
      for (std::size_t c = 0; c < C; ++c)
        for (const auto& [q, coef] : spec.counters[c].terms)
          if (q == pred) cr[row][c] += coef;
    }
    wr[row] = w;
  }

  struct TypeInfo {
    std::size_t pos;
    std::vector<char> ok;
    std::vector<long long> rmin, rmax;
  };
  std::vector<TypeInfo> infos;
  for (std::size_t pos = 0; pos < pr.types.size(); ++pos) {
    TypeInfo ti{pos, std::vector<char>(rows), std::vector<long long>(C, kPosInf),
                std::vector<long long>(C, kNegInf)};
    bool any = false;
    for (int row = 0; row < rows; ++row) {
      if (!cells.row_ok(pr.types[pos], row)) continue;
      ti.ok[row] = 1;
      any = true;
      for (std::size_t c = 0; c < C; ++c) {
        ti.rmin[c] = std::min(ti.rmin[c], cr[row][c]);
        ti.rmax[c] = std::max(ti.rmax[c], cr[row][c]);
      }
    }
    if (!any) {
      if (n > 1) continue;
      std::fill(ti.rmin.begin(), ti.rmin.end(), 0);
      std::fill(ti.rmax.begin(), ti.rmax.end(), 0);
    }
    infos.push_back(std::move(ti));
  }
  if (infos.empty()) return {};

  // Range of one element's contribution to each counter.
  Poly::Exps emin(C, kPosInf), emax(C, kNegInf), cumin(C, kPosInf),
      cumax(C, kNegInf);
  for (const auto& ti : infos) {
    for (std::size_t c = 0; c < C; ++c) {
      long long cu = pr.cu[c][ti.pos];
      emin[c] = std::min(emin[c], cu + (n - 1) * ti.rmin[c]);
      emax[c] = std::max(emax[c], cu + (n - 1) * ti.rmax[c]);
      cumin[c] = std::min(cumin[c], cu);
      cumax[c] = std::max(cumax[c], cu);
    }
  }
  auto element_window = [&](unsigned long j, Poly::Exps& lo, Poly::Exps& hi) {
    lo.resize(C);
    hi.resize(C);
    long long rest = n - static_cast<long long>(j);
    for (std::size_t c = 0; c < C; ++c) {
      const Counter& ct = spec.counters[c];
      lo[c] = std::max<long long>(j * emin[c], sub_mul(ct.target_lo, rest, emax[c]));
      hi[c] = std::min<long long>(j * emax[c], sub_mul(ct.target_hi, rest, emin[c]));
    }
  };

  // W = sum_t weight_t z^{cu_t} g_t(z)^{n-1}; rows patterns shared by
  // several 1-types are powered once.
  Poly::Exps wlo, whi;
  element_window(1, wlo, whi);
  Poly W(wlo, whi);
  std::map<std::vector<char>, Poly> cache;
  for (const auto& ti : infos) {
    auto it = cache.find(ti.ok);
    if (it == cache.end()) {
      Poly g(ti.rmin, ti.rmax);
      for (int row = 0; row < rows; ++row)
        if (ti.ok[row]) g.add(cr[row], wr[row]);
      auto row_window = [&](unsigned long j, Poly::Exps& lo, Poly::Exps& hi) {
        lo.resize(C);
        hi.resize(C);
        long long rest = n - 1 - static_cast<long long>(j);
        for (std::size_t c = 0; c < C; ++c) {
          const Counter& ct = spec.counters[c];
          long long others_lo = cumin[c] + (n - 1) * emin[c];
          long long others_hi = cumax[c] + (n - 1) * emax[c];
          lo[c] = std::max<long long>(
              j * ti.rmin[c],
              sub_mul(sub_mul(ct.target_lo, rest, ti.rmax[c]), 1, others_hi));
          hi[c] = std::min<long long>(
              j * ti.rmax[c],
              sub_mul(sub_mul(ct.target_hi, rest, ti.rmin[c]), 1, others_lo));
        }
      };
      it = cache.emplace(ti.ok, power(g, n - 1, row_window)).first;
    }
    const Poly& gp = it->second;
    Poly::Exps shifted(C);
    gp.for_each([&](const Poly::Exps& e, const Integer& coef) {
      for (std::size_t c = 0; c < C; ++c) shifted[c] = e[c] + pr.cu[c][ti.pos];
      W.add(shifted, coef * pr.weight[ti.pos]);
    });
  }
  Poly total = power(W, n, element_window);
  Table out;
  total.for_each([&](const Poly::Exps& e, const Integer& coef) { out[e] = coef; });
  return out;
}

}  // namespace

ProfileTable compute_profiles(const NormalizedProblem& np,
                              const CellStructure& cells, int n,
                              const ProfileSpec& spec) {
  if (n < 1) throw SemanticError("domain size must be at least 1");
  Prepared pr = prepare(np, cells, n, spec);
  ProfileTable out;
  out.counters = spec.counters;
  out.denominator = pr.scaled.denominator;
  bool separable = cells.separable();
  if (spec.path == EnginePath::Separable && !separable)
    throw UnsupportedError("matrix is not separable");
  if (spec.path == EnginePath::General) separable = false;
  out.separable = separable;
  int threads = spec.threads > 0 ? spec.threads : default_threads();
  if (separable) {
    out.values = separable_profiles(cells, n, spec, pr);
  } else {
    GeneralDP dp(cells, n, spec, pr);
    out.values = dp.run(threads);
  }
  for (auto it = out.values.begin(); it != out.values.end();)
    it = sgn(it->second) == 0 ? out.values.erase(it) : std::next(it);
  return out;
}

// --- closed forms ---------------------------------------------------------------

Integer universal_term(const CellStructure& cells, const std::vector<int>& k) {
  int T = cells.num_types();
  if (static_cast<int>(k.size()) != T)
    throw SemanticError("k-vector has the wrong length");
  for (int i = 0; i < T; ++i)
    if (k[i] > 0 && !cells.valid_one_type(i)) return Integer(0);
  Integer term = multinomial(k);
  for (int i = 0; i < T; ++i) {
    if (k[i] == 0) continue;
    for (int j = i; j < T; ++j) {
      if (k[j] == 0) continue;
      unsigned long e = i == j ? static_cast<unsigned long>(k[i]) * (k[i] - 1) / 2
                               : static_cast<unsigned long>(k[i]) * k[j];
      if (e == 0) continue;
      term *= ipow(Integer(cells.nij(i, j)), e);
      if (sgn(term) == 0) return term;
    }
  }
  return term;
}

std::vector<std::pair<std::vector<int>, Integer>> universal_terms(
    const CellStructure& cells, int n) {
  std::vector<std::pair<std::vector<int>, Integer>> out;
  std::vector<int> valid = cells.valid_types();
  std::vector<int> k(cells.num_types(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t t, int rest) {
    if (t + 1 >= valid.size()) {
      if (valid.empty()) return;
      k[valid[t]] = rest;
      out.emplace_back(k, universal_term(cells, k));
      k[valid[t]] = 0;
      return;
    }
    for (int c = rest; c >= 0; --c) {
      k[valid[t]] = c;
      rec(t + 1, rest - c);
    }
    k[valid[t]] = 0;
  };
  rec(0, n);
  std::sort(out.begin(), out.end());
  return out;
}

Integer fomc_universal(const CellStructure& cells, int n) {
  Integer total(0);
  for (const auto& [k, term] : universal_terms(cells, n)) total += term;
  return total;
}

// --- counting queries -------------------------------------------------------------

namespace {

struct Check {
  int counter;
  CmpOp op;
  long long rhs;
};

struct Plan {
  std::vector<Counter> counters;
  std::vector<Check> checks;
  std::vector<CardConstraint> residual;
  std::map<std::string, int> single;  // predicate -> counter of |P|
  bool infeasible = false;

  int add_counter(Counter c) {
    auto terms = c.terms;
    std::sort(terms.begin(), terms.end());
    for (std::size_t i = 0; i < counters.size(); ++i) {
      auto other = counters[i].terms;
      std::sort(other.begin(), other.end());
      if (other == terms) {
        counters[i].target_lo = std::max(counters[i].target_lo, c.target_lo);
        counters[i].target_hi = std::min(counters[i].target_hi, c.target_hi);
        return static_cast<int>(i);
      }
    }
    counters.push_back(std::move(c));
    return static_cast<int>(counters.size() - 1);
  }

  int track(const std::string& pred) {
    auto it = single.find(pred);
    if (it != single.end()) return it->second;
    Counter c;
    c.name = pred;
    c.terms = {{pred, 1}};
    int idx = add_counter(std::move(c));
    single[pred] = idx;
    return idx;
  }
};

bool compare(long long lhs, CmpOp op, long long rhs) {
  switch (op) {
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Ge: return lhs >= rhs;
    case CmpOp::Gt: return lhs > rhs;
  }
  return false;
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Ge: return CmpOp::Le;
    case CmpOp::Gt: return CmpOp::Lt;
    default: return op;
  }
}

void add_comparison(Plan& plan, const CardConstraint& c, int n) {
  AffineForm f = affine_form(num_binary(NumOp::Sub, c->lhs, c->rhs), n);
  Integer scale(1);
  for (const auto& [p, coef] : f.coef)
    mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), coef.get_den_mpz_t());
  mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), f.constant.get_den_mpz_t());
  CmpOp op = c->cmp;
  if (f.coef.empty()) {
    if (!compare(sgn(f.constant), op, 0)) plan.infeasible = true;
    return;
  }
  Counter ct;
  bool negate = f.coef.begin()->second < 0;
  for (const auto& [p, coef] : f.coef) {
    Rational v = coef * Rational(scale);
    if (negate) v = -v;
    if (!v.get_num().fits_slong_p())
      throw UnsupportedError("constraint coefficient too large");
    ct.terms.emplace_back(p, v.get_num().get_si());
  }
  Rational r = -f.constant * Rational(scale);
  if (negate) {
    r = -r;
    op = flip(op);
  }
  if (!r.get_num().fits_slong_p())
    throw UnsupportedError("constraint constant too large");
  long long rhs = r.get_num().get_si();
  ct.name = to_string(c);
  switch (op) {
    case CmpOp::Eq: ct.target_lo = ct.target_hi = rhs; break;
    case CmpOp::Le: ct.target_hi = rhs; break;
    case CmpOp::Lt: ct.target_hi = rhs - 1; break;
    case CmpOp::Ge: ct.target_lo = rhs; break;
    case CmpOp::Gt: ct.target_lo = rhs + 1; break;
    case CmpOp::Ne: break;
  }
  bool single = ct.terms.size() == 1 && ct.terms[0].second == 1;
  std::string pred = ct.terms[0].first;
  int idx = plan.add_counter(std::move(ct));
  if (single) plan.single.emplace(pred, idx);
  plan.checks.push_back({idx, op, rhs});
}

void flatten(const CardConstraint& c, std::vector<CardConstraint>& out) {
  if (!c || c->op == CardOp::True) return;
  if (c->op == CardOp::And) {
    for (const auto& k : c->kids) flatten(k, out);
    return;
  }
  out.push_back(c);
}

}  // namespace

CountResult count(const NormalizedProblem& np, int n,
                  const CountRequest& request) {
  if (n < 1) throw SemanticError("domain size must be at least 1");
  Plan plan;
  std::vector<CardConstraint> parts;
  flatten(np.constraint, parts);
  flatten(request.extra, parts);
  for (const auto& c : parts) {
    for (const auto& p : referenced_predicates(c))
      if (!np.signature.contains(p))
        throw SemanticError("constraint references unknown predicate " + p);
    if (c->op == CardOp::Cmp) {
      add_comparison(plan, c, n);
    } else {
      plan.residual.push_back(c);
      for (const auto& p : referenced_predicates(c)) plan.track(p);
    }
  }
  std::vector<std::string> reported = request.track;
  if (request.profile_weight)
    for (const auto& p : referenced_predicates(request.profile_weight))
      if (std::find(reported.begin(), reported.end(), p) == reported.end())
        reported.push_back(p);
  for (const auto& p : reported) {
    if (!np.signature.contains(p))
      throw SemanticError("cannot track unknown predicate " + p);
    plan.track(p);
  }
  bool maximize = np.strategy == CountingStrategy::Maximize &&
                  !np.maximize.empty();
  if (maximize) {
    // Profiles are compared on the cardinalities of every predicate except
    // the block's own A and f's; sign predicates are summed out.
    std::vector<std::string> negative = np.negative_predicates();
    std::set<std::string> block_preds;
    for (const auto& d : np.maximize) {
      block_preds.insert(d.a);
      block_preds.insert(d.f.begin(), d.f.end());
    }
    for (const auto& p : np.signature.predicates()) {
      if (std::find(negative.begin(), negative.end(), p.name) != negative.end())
        continue;
      if (block_preds.count(p.name)) continue;
      plan.track(p.name);
    }
    for (const auto& d : np.maximize) plan.track(d.a);
  }

  CountResult result;
  result.tracked = reported;
  if (plan.infeasible) return result;

  CellStructure cells(np.matrix, np.signature);
  ProfileSpec spec;
  spec.counters = plan.counters;
  spec.weights = request.weights;
  spec.threads = request.threads;
  spec.path = request.path;
  ProfileTable table = compute_profiles(np, cells, n, spec);
  result.separable = table.separable;

  auto lookup_in = [&](const Key& key) {
    return [&plan, &key](const std::string& p) -> long long {
      auto it = plan.single.find(p);
      if (it == plan.single.end())
        throw SemanticError("predicate " + p + " is not tracked");
      return key[it->second];
    };
  };
  // Constraint filter.
  std::vector<std::pair<Key, Integer>> kept;
  for (const auto& [key, value] : table.values) {
    bool ok = true;
    for (const auto& ch : plan.checks)
      if (!compare(key[ch.counter], ch.op, ch.rhs)) ok = false;
    if (ok)
      for (const auto& r : plan.residual)
        if (!satisfied(r, lookup_in(key), n)) ok = false;
    if (ok) kept.emplace_back(key, value);
  }

  // Maximize filter: within each group agreeing on all counters not tied to
  // the block, keep only the largest |A| with a nonzero total.
  std::vector<Rational> divisor(kept.size(), Rational(1));
  if (maximize) {
    std::vector<char> keep(kept.size(), 1);
    for (const auto& d : np.maximize) {
      int a = plan.single.at(d.a);
      std::set<std::string> tied(d.f.begin(), d.f.end());
      tied.insert(d.a);
      std::vector<int> group_dims;
      for (std::size_t c = 0; c < plan.counters.size(); ++c) {
        bool involved = false;
        for (const auto& [p, coef] : plan.counters[c].terms)
          if (tied.count(p)) involved = true;
        if (!involved) group_dims.push_back(static_cast<int>(c));
      }
      std::map<Key, long long> best;
      for (const auto& [key, value] : kept) {
        Key g;
        for (int c : group_dims) g.push_back(key[c]);
        auto it = best.find(g);
        if (it == best.end() || key[a] > it->second) best[g] = key[a];
      }
      int m = 0;
      for (const auto& blk : np.blocks)
        if (blk.index == d.block) m = blk.m;
      Integer mf = factorial(m);
      for (std::size_t e = 0; e < kept.size(); ++e) {
        const Key& key = kept[e].first;
        Key g;
        for (int c : group_dims) g.push_back(key[c]);
        if (key[a] != best[g]) keep[e] = 0;
        divisor[e] *= Rational(ipow(mf, static_cast<unsigned long>(key[a])));
      }
    }
    std::vector<std::pair<Key, Integer>> filtered;
    std::vector<Rational> fdiv;
    for (std::size_t e = 0; e < kept.size(); ++e) {
      if (!keep[e]) continue;
      filtered.push_back(kept[e]);
      fdiv.push_back(divisor[e]);
    }
    kept = std::move(filtered);
    divisor = std::move(fdiv);
  }

  // Marginalize onto the reported predicates.
  std::map<Key, Rational> profiles;
  for (std::size_t e = 0; e < kept.size(); ++e) {
    Key out;
    for (const auto& p : reported) out.push_back(kept[e].first[plan.single.at(p)]);
    profiles[out] += Rational(kept[e].second) / divisor[e];
  }
  bool weighted = false;
  for (const auto& [p, w] : request.weights)
    if (w.w1 != 1 || w.w0 != 1) weighted = true;
  Rational den(table.denominator);
  for (auto& [key, value] : profiles) {
    value /= den;
    value.canonicalize();
    if (!weighted) {
      if (!is_integer(value))
        throw ConsistencyError("inexact division in profile: " +
                               to_string(value));
      if (value < 0)
        throw ConsistencyError("negative model count in profile: " +
                               to_string(value));
    }
    if (value == 0) continue;
    Rational w(1);
    if (request.profile_weight) {
      w = evaluate(
          request.profile_weight,
          [&](const std::string& p) -> long long {
            auto it = std::find(reported.begin(), reported.end(), p);
            return key[it - reported.begin()];
          },
          n);
    }
    result.total += w * value;
    result.profiles.emplace_back(key, value);
  }
  result.total.canonicalize();
  return result;
}

Integer fomc(const NormalizedProblem& np, int n) {
  Rational r = count(np, n).total;
  return r.get_num();
}

Integer fomc_scott(const NormalizedProblem& np, int n) {
  if (!np.blocks.empty() || (np.constraint && !is_trivial(np.constraint)))
    throw SemanticError(
        "fomc_scott expects no counting blocks and no constraint");
  return fomc(np, n);
}

Integer fomc_constrained(const NormalizedProblem& np, int n,
                         const CardConstraint& rho) {
  CountRequest req;
  req.extra = rho;
  return count(np, n, req).total.get_num();
}

LemmaEm lemma_em_diagnostic(const NormalizedProblem& np, int n, int m) {
  if (np.sign_predicates.size() != 1 || !np.blocks.empty())
    throw SemanticError("lemma diagnostic needs exactly one existential");
  if (m < 0 || m > n) throw SemanticError("m must lie in [0, n]");
  CellStructure cells(np.matrix, np.signature);
  ProfileSpec spec;
  spec.apply_signs = false;
  Counter c;
  c.name = np.sign_predicates[0];
  c.terms = {{c.name, 1}};
  spec.counters = {c};
  ProfileTable table = compute_profiles(np, cells, n, spec);
  std::vector<Integer> p(n + 1);
  for (const auto& [key, value] : table.values) p[key[0]] += value;
  LemmaEm out;
  out.p = p[m];
  for (int k = m; k <= n; ++k) {
    Integer term = binomial(k, m) * p[k];
    if ((k - m) & 1) {
      out.e -= term;
    } else {
      out.e += term;
    }
  }
  return out;
}

}  // namespace fo2

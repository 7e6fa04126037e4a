#pragma once

#include <functional>
#include <vector>

#include "fo2/number.hpp"

namespace fo2 {

// Dense multivariate Laurent polynomial with integer coefficients, stored
// over a box of exponents [lo_d, hi_d] per variable. Products are truncated
// to a caller-chosen box; terms outside it are dropped. Zero variables make
// it a plain integer.
class Poly {
 public:
  using Exps = std::vector<long long>;

  Poly() : Poly(Exps{}, Exps{}) {}
  Poly(Exps lo, Exps hi);
  static Poly constant(const Integer& c, std::size_t dims);

  std::size_t dims() const { return lo_.size(); }
  const Exps& lo() const { return lo_; }
  const Exps& hi() const { return hi_; }
  bool empty_box() const { return coef_.empty(); }
  bool is_zero() const;
  bool operator==(const Poly& other) const;

  // Adds c * z^e; silently dropped when e is outside the box.
  void add(const Exps& e, const Integer& c);
  Integer coefficient(const Exps& e) const;
  void scale(const Integer& c);

  // Product truncated to [lo, hi].
  Poly multiply(const Poly& other, const Exps& lo, const Exps& hi) const;

  // Calls f(exponents, coefficient) for every nonzero term, in index order.
  void for_each(const std::function<void(const Exps&, const Integer&)>& f) const;

  // Exponent range actually used by nonzero terms (empty when zero).
  bool support(Exps& lo, Exps& hi) const;

 private:
  bool index_of(const Exps& e, std::size_t& idx) const;
  void decode(std::size_t idx, Exps& e) const;

  Exps lo_, hi_;
  std::vector<std::size_t> stride_;
  std::vector<Integer> coef_;
};

// base^e by repeated squaring. window(j, lo, hi) sets the box kept for a
// partial product of j factors.
Poly power(const Poly& base, unsigned long e,
           const std::function<void(unsigned long, Poly::Exps&, Poly::Exps&)>&
               window);

}  // namespace fo2

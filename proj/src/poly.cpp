#include "fo2/poly.hpp"

#include "fo2/errors.hpp"

namespace fo2 {

namespace {
// Keeps dense boxes within memory reach.
constexpr std::size_t kMaxCoefficients = std::size_t{1} << 26;
}  // namespace

Poly::Poly(Exps lo, Exps hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  std::size_t size = 1;
  stride_.resize(lo_.size());
  for (std::size_t d = lo_.size(); d-- > 0;) {
    stride_[d] = size;
    if (hi_[d] < lo_[d]) {
      size = 0;
      break;
    }
    std::size_t extent = static_cast<std::size_t>(hi_[d] - lo_[d] + 1);
    if (extent > kMaxCoefficients / std::max<std::size_t>(size, 1))
      throw UnsupportedError("profile polynomial too large (counter ranges)");
    size *= extent;
  }
  coef_.resize(size);  // mpz_init: no allocation until written
}

Poly Poly::constant(const Integer& c, std::size_t dims) {
  Poly p(Exps(dims, 0), Exps(dims, 0));
  p.coef_[0] = c;
  return p;
}

bool Poly::is_zero() const {
  for (const auto& c : coef_)
    if (sgn(c) != 0) return false;
  return true;
}

bool Poly::index_of(const Exps& e, std::size_t& idx) const {
  if (coef_.empty()) return false;
  idx = 0;
  for (std::size_t d = 0; d < lo_.size(); ++d) {
    if (e[d] < lo_[d] || e[d] > hi_[d]) return false;
    idx += static_cast<std::size_t>(e[d] - lo_[d]) * stride_[d];
  }
  return true;
}

void Poly::decode(std::size_t idx, Exps& e) const {
  e.resize(lo_.size());
  for (std::size_t d = 0; d < lo_.size(); ++d) {
    e[d] = lo_[d] + static_cast<long long>(idx / stride_[d]);
    idx %= stride_[d];
  }
}

bool Poly::operator==(const Poly& other) const {
  if (lo_ != other.lo_ || hi_ != other.hi_) return false;
  for (std::size_t i = 0; i < coef_.size(); ++i)
    if (coef_[i] != other.coef_[i]) return false;
  return true;
}

void Poly::add(const Exps& e, const Integer& c) {
  std::size_t idx;
  if (index_of(e, idx)) coef_[idx] += c;
}

Integer Poly::coefficient(const Exps& e) const {
  std::size_t idx;
  return index_of(e, idx) ? coef_[idx] : Integer(0);
}

void Poly::scale(const Integer& c) {
  for (auto& x : coef_) x *= c;
}

Poly Poly::multiply(const Poly& other, const Exps& lo, const Exps& hi) const {
  Poly out(lo, hi);
  if (out.coef_.empty()) return out;
  std::size_t dims = lo_.size();
  if (dims == 0) {
    if (!coef_.empty() && !other.coef_.empty())
      out.coef_[0] = coef_[0] * other.coef_[0];
    return out;
  }
  // Nonzero terms as flat exponent rows.
  auto terms = [dims](const Poly& p, std::vector<long long>& exps,
                      std::vector<const Integer*>& cs) {
    Exps e;
    for (std::size_t i = 0; i < p.coef_.size(); ++i) {
      if (sgn(p.coef_[i]) == 0) continue;
      p.decode(i, e);
      exps.insert(exps.end(), e.begin(), e.begin() + dims);
      cs.push_back(&p.coef_[i]);
    }
  };
  std::vector<long long> ea, eb;
  std::vector<const Integer*> ca, cb;
  terms(*this, ea, ca);
  terms(other, eb, cb);
  for (std::size_t x = 0; x < ca.size(); ++x) {
    const long long* pa = &ea[x * dims];
    for (std::size_t y = 0; y < cb.size(); ++y) {
      const long long* pb = &eb[y * dims];
      std::size_t idx = 0;
      bool inside = true;
      for (std::size_t d = 0; d < dims; ++d) {
        long long e = pa[d] + pb[d];
        if (e < lo[d] || e > hi[d]) {
          inside = false;
          break;
        }
        idx += static_cast<std::size_t>(e - lo[d]) * out.stride_[d];
      }
      if (inside) mpz_addmul(out.coef_[idx].get_mpz_t(), ca[x]->get_mpz_t(),
                             cb[y]->get_mpz_t());
    }
  }
  return out;
}

void Poly::for_each(
    const std::function<void(const Exps&, const Integer&)>& f) const {
  Exps e;
  for (std::size_t i = 0; i < coef_.size(); ++i) {
    if (sgn(coef_[i]) == 0) continue;
    decode(i, e);
    f(e, coef_[i]);
  }
}

bool Poly::support(Exps& lo, Exps& hi) const {
  bool any = false;
  for_each([&](const Exps& e, const Integer&) {
    if (!any) {
      lo = e;
      hi = e;
      any = true;
      return;
    }
    for (std::size_t d = 0; d < e.size(); ++d) {
      lo[d] = std::min(lo[d], e[d]);
      hi[d] = std::max(hi[d], e[d]);
    }
  });
  return any;
}

Poly power(const Poly& base, unsigned long e,
           const std::function<void(unsigned long, Poly::Exps&, Poly::Exps&)>&
               window) {
  Poly::Exps lo, hi;
  window(0, lo, hi);
  Poly result(lo, hi);
  result.add(Poly::Exps(base.dims(), 0), Integer(1));
  if (e == 0) return result;
  Poly sq = base;
  unsigned long sq_count = 1, res_count = 0;
  for (;;) {
    if (e & 1) {
      res_count += sq_count;
      window(res_count, lo, hi);
      result = result.multiply(sq, lo, hi);
    }
    e >>= 1;
    if (e == 0) break;
    sq_count *= 2;
    window(sq_count, lo, hi);
    sq = sq.multiply(sq, lo, hi);
  }
  return result;
}

}  // namespace fo2

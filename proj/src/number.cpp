#include "fo2/number.hpp"

#include <cctype>
#include <string>

#include "fo2/errors.hpp"

namespace fo2 {

Integer factorial(unsigned long n) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

Integer binomial(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

Integer multinomial(const std::vector<int>& k) {
  Integer r = 1;
  unsigned long total = 0;
  for (int ki : k) {
    total += static_cast<unsigned long>(ki);
    r *= binomial(total, static_cast<unsigned long>(ki));
  }
  return r;
}

Integer ipow(const Integer& base, unsigned long exp) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&]() {
    return SemanticError("malformed number '" + s + "'");
  };
  if (s.empty()) throw bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw SemanticError("zero denominator in '" + s + "'");
    Rational r = num / den;
    r.canonicalize();
    return r;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '-' || s[pos] == '+') {
    negative = s[pos] == '-';
    ++pos;
  }
  std::string digits;
  int frac_digits = 0;
  bool seen_dot = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      if (seen_dot) ++frac_digits;
    } else {
      throw bad();
    }
  }
  if (digits.empty()) throw bad();
  Integer num(digits, 10);
  Rational r(num, ipow(Integer(10), static_cast<unsigned long>(frac_digits)));
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

std::string to_string(const Integer& v) { return v.get_str(10); }

std::string to_string(const Rational& v) {
  if (v.get_den() == 1) return v.get_num().get_str(10);
  return v.get_num().get_str(10) + "/" + v.get_den().get_str(10);
}

std::string to_decimal(const Rational& v, int digits) {
  Integer scale = ipow(Integer(10), static_cast<unsigned long>(digits));
  Integer num = v.get_num();
  bool negative = num < 0;
  if (negative) num = -num;
  Integer scaled = (num * scale) / v.get_den();
  std::string s = scaled.get_str(10);
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits)
      s.insert(0, static_cast<std::size_t>(digits + 1 - s.size()), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  return negative ? "-" + s : s;
}

}  // namespace fo2

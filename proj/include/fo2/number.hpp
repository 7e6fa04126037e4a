#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace fo2 {

using Integer = mpz_class;
using Rational = mpq_class;

Integer factorial(unsigned long n);
Integer binomial(unsigned long n, unsigned long k);
// n! / (k_0! k_1! ...); requires sum(k) == n.
Integer multinomial(const std::vector<int>& k);
Integer ipow(const Integer& base, unsigned long exp);

// Parses "12", "-3", "0.25", "1/3" exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Integer& v);
// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& v);
// Fixed-point rendering with `digits` fractional digits (truncated toward zero).
std::string to_decimal(const Rational& v, int digits = 12);

inline bool is_integer(const Rational& v) { return v.get_den() == 1; }

}  // namespace fo2

#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace holocyc {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Accepts "p/q", integers and plain decimals ("-14.333", "1e-3").
// Throws std::invalid_argument on anything else, including a zero denominator.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

Rational pow10(int k);
Integer trunc(const Rational& q);   // toward zero
Integer floor(const Rational& q);
Integer ceil(const Rational& q);
Rational abs(const Rational& q);

} // namespace holocyc

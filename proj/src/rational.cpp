#include "holocyc/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace holocyc {

namespace {

bool all_digits(const std::string& s)
{
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// A leading zero would make the string constructor read octal.
Integer digits_to_integer(const std::string& s)
{
    size_t first = s.find_first_not_of('0');
    return first == std::string::npos ? Integer(0) : Integer(s.substr(first));
}

Rational parse_integer(std::string s)
{
    bool neg = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        neg = s[0] == '-';
        s.erase(0, 1);
    }
    if (!all_digits(s)) throw std::invalid_argument("not an integer: " + s);
    Rational q{digits_to_integer(s)};
    return neg ? Rational(-q) : q;
}

Rational parse_decimal(const std::string& text)
{
    std::string s = text;
    int exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        std::string e = s.substr(epos + 1);
        s = s.substr(0, epos);
        if (e.empty()) throw std::invalid_argument("bad exponent in " + text);
        size_t used = 0;
        exp10 = std::stoi(e, &used);
        if (used != e.size()) throw std::invalid_argument("bad exponent in " + text);
    }
    bool neg = false;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        neg = s[0] == '-';
        s.erase(0, 1);
    }
    auto dot = s.find('.');
    std::string digits = s;
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<int>(s.size() - dot - 1);
    }
    if (!all_digits(digits)) throw std::invalid_argument("not a number: " + text);
    Rational q{digits_to_integer(digits)};
    q *= pow10(exp10);
    return neg ? Rational(-q) : q;
}

std::string strip(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t\n\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\n\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Rational parse_rational(const std::string& raw)
{
    std::string text = strip(raw);
    if (text.empty()) throw std::invalid_argument("empty number");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_integer(strip(text.substr(0, slash)));
        Rational den = parse_integer(strip(text.substr(slash + 1)));
        if (den == 0) throw std::invalid_argument("zero denominator in " + text);
        return num / den;
    }
    return parse_decimal(text);
}

std::string to_string(const Rational& q)
{
    Integer n = numerator(q), d = denominator(q);
    if (d == 1) return n.str();
    return n.str() + "/" + d.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

Rational pow10(int k)
{
    Integer p = 1;
    for (int i = 0; i < (k < 0 ? -k : k); ++i) p *= 10;
    return k < 0 ? Rational(Integer(1), p) : Rational(p);
}

Integer trunc(const Rational& q)
{
    Integer n = numerator(q), d = denominator(q);
    return n / d;   // gmp division truncates toward zero
}

Integer floor(const Rational& q)
{
    Integer t = trunc(q);
    if (q < 0 && Rational(t) != q) t -= 1;
    return t;
}

Integer ceil(const Rational& q)
{
    Integer t = trunc(q);
    if (q > 0 && Rational(t) != q) t += 1;
    return t;
}

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

} // namespace holocyc

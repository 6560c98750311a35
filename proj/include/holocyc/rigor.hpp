#pragma once

#include "holocyc/core.hpp"
#include "holocyc/rational.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace holocyc {

// Closed interval with exact rational endpoints; the true value lies inside.
struct Enclosure {
    Rational lo, hi;

    Enclosure() = default;
    explicit Enclosure(const Rational& x) : lo(x), hi(x) {}
    Enclosure(const Rational& l, const Rational& h);

    Rational mid() const { return (lo + hi) / 2; }
    Rational width() const { return hi - lo; }
    Rational mag() const;   // max |x| over the interval
    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    bool contains_zero() const { return lo <= 0 && hi >= 0; }
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a);
Enclosure operator*(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Rational& s, const Enclosure& a);

enum class Elementary { sin, cos, exp };

// Width at most 2^{1-bits} max(1, |value|); Taylor series with a Lagrange
// remainder, endpoints rounded outward to dyadic rationals.
Enclosure enclose(Elementary fn, const Rational& x, int precision_bits);
Enclosure enclose(Elementary fn, const Enclosure& x, int precision_bits);
Enclosure pi_enclosure(int precision_bits);

// h(x) = A cos(alpha x) + B sin(alpha x) + C e^{beta x} + D e^{-beta x} on [x_lo, x_hi].
struct TrigExpFace {
    Enclosure A, B, C, D;
    Rational alpha{1}, beta{1};
    Rational x_lo, x_hi;
};

struct TaylorBound {
    std::vector<Enclosure> coeffs;   // a_0 .. a_n
    Rational m_bar;                  // h(x) - sum a_j x^j is within m_bar x^{n+1}
};

// The D e^{-beta x} part of the remainder is bounded by |D| beta^{n+1}: the
// Lagrange point ranges over [0, x], where e^{-beta xi} <= 1.
TaylorBound taylor_bound(const TrigExpFace& face, int n, int precision_bits = 128);

class RationalPoly {
public:
    std::vector<Rational> coeffs;   // coeffs[k] multiplies x^k

    RationalPoly() = default;
    explicit RationalPoly(std::vector<Rational> c);

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    bool is_zero() const { return coeffs.empty(); }
    Rational operator()(const Rational& x) const;
    RationalPoly derivative() const;
    std::vector<std::string> to_strings() const;
};

enum class Bound { upper, lower };

struct Truncation {
    RationalPoly poly;
    // false when some enclosure straddles a multiple of 10^{-k}, so that the
    // digits of a_j are not yet determined at this precision (still sound)
    bool digits_determined = true;
};

// a_j^+ = trunc(a_j 10^k) 10^{-k} + 10^{-k}, plus M x^{n+1} (upper), or
// a_j^- = trunc(a_j 10^k) 10^{-k} - 10^{-k}, minus M x^{n+1} (lower).
Truncation rational_majorant(const std::vector<Enclosure>& coeffs, const Rational& M, int n, int k, Bound side);

std::vector<RationalPoly> sturm_sequence(const RationalPoly& p);
// Distinct real roots in (lo, hi).  Throws std::invalid_argument if p(lo) or
// p(hi) vanishes.
int sturm_count(const RationalPoly& p, const Rational& lo, const Rational& hi);

// Smallest 1/q (q <= 10^6) not below m_bar, or c/100 10^{-j} for tiny m_bar.
Rational choose_M(const Rational& m_bar);

enum class Sign { negative, positive };

struct SignCertificate {
    bool certified = false;
    std::string reason;
    int n = 0, k = 0, precision_bits = 0;
    Rational M, m_bar;
    RationalPoly poly;
    bool digits_determined = true;
    Rational x_lo, x_hi, probe;
    Rational at_lo, at_probe, at_hi;
    int sturm_length = 0;
    int sturm_roots = -1;
};

SignCertificate certify_sign(const TrigExpFace& face, Sign expected, int n, int k, const Rational& M,
                             int precision_bits = 128);

// Flight-time equations for a system with linear sides (i + lambda^{+-}) z + b^{+-}.
// With foci p (lower) and q (upper) and K clearing the denominators of
// y_q, x_p - x_q, y_p:
//   e_1 = a cos v + b sin v + c e^{-lambda^+ v},  e_2 = d cos v + e sin v + f e^{-lambda^+ v}
//   a = -K y_q sin u,  b = K[(x_p - x_q) sin u + y_p (e^{lambda^- u} - cos u)],  c = -a,
//   d = -b,  e = a,  f = K[(x_p - x_q) sin u + y_p (cos u - e^{-lambda^- u})].
struct CrossingEquations {
    Rational K, xp, yp, xq, yq, lambda_plus, lambda_minus;

    // which = 1 or 2; the face is a function of v (fixed u) or of u (fixed v)
    TrigExpFace face_fixed_u(int which, const Rational& u, const Rational& v_lo, const Rational& v_hi,
                             int precision_bits) const;
    TrigExpFace face_fixed_v(int which, const Rational& v, const Rational& u_lo, const Rational& u_hi,
                             int precision_bits) const;

    std::array<long double, 2> eval(long double u, long double v) const;
    std::array<long double, 4> jacobian(long double u, long double v) const;   // row major
    // Start of the cycle on Sigma given the lower flight time u.
    long double section_point(long double u) const;
};

CrossingEquations crossing_equations(const PiecewiseSystem& s);

struct Box {
    Rational u_lo, u_hi, v_lo, v_hi;
};

enum class FaceId { u_lo, u_hi, v_lo, v_hi };
std::string face_name(FaceId f);

struct FaceParams {
    int function = 1;   // 1 -> e_1, 2 -> e_2
    Sign expected = Sign::negative;
    int n = 8, k = 6;
    std::optional<Rational> M;   // chosen from m_bar when absent
};

struct FaceResult {
    FaceId face;
    int function;
    Sign expected;
    SignCertificate cert;
    bool escalated = false;
    std::string note;
};

struct MirandaCertificate {
    Box box;
    std::vector<FaceResult> faces;   // u_lo, u_hi, v_lo, v_hi
    bool certified = false;
    std::string failure;
};

// Faces are tried with the given parameters first; when that fails and
// `escalate` is set, M is re-chosen from m_bar, then precision, n and k grow.
MirandaCertificate miranda_verify(const CrossingEquations& eq, const Box& box, const std::array<FaceParams, 4>& params,
                                  int precision_bits = 128, bool escalate = true);

// Assigns e_1/e_2 and expected signs from floating-point samples along each
// face when a boxes file leaves them out.
std::array<FaceParams, 4> default_face_params(const CrossingEquations& eq, const Box& box);

struct BoxSpec {
    Box box;
    std::optional<std::array<FaceParams, 4>> faces;
};

// [{"u": ["p/q","p/q"], "v": [...], "faces": {"u_lo": {"function": "e1",
//   "sign": "negative", "n": 7, "k": 5, "M": "1/58"}, ...}}, ...]
std::vector<BoxSpec> parse_boxes(const std::string& text);

std::string certificate_json(const PiecewiseSystem& s, const std::vector<MirandaCertificate>& certs);

struct ReverifyResult {
    bool ok = false;
    std::vector<std::string> mismatches;
};

// Rebuilds every face from the recorded system and parameters and requires the
// regenerated certificate to be identical to the stored one.
ReverifyResult reverify(const std::string& certificate_text);

struct NewtonResult {
    long double u = 0, v = 0;
    long double residual = 0;
    int iterations = 0;
    bool converged = false;
    bool inside = false;
};

NewtonResult damped_newton(const CrossingEquations& eq, const Box& box, int max_iter = 100);

} // namespace holocyc

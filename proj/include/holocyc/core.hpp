#pragma once

#include "holocyc/rational.hpp"

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace holocyc {

using Complex = std::complex<double>;
using ExactComplex = std::pair<Rational, Rational>;

// Polynomial in one complex variable, coeffs[k] multiplies z^k.
// `exact` is filled when the coefficients came from text, so the rigor module
// can work without any floating point loss.
struct HoloPoly {
    std::vector<Complex> coeffs;
    std::optional<std::vector<ExactComplex>> exact;

    HoloPoly() = default;
    explicit HoloPoly(std::vector<Complex> c);
    explicit HoloPoly(std::vector<ExactComplex> c);

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    bool is_zero() const;
    Complex operator()(Complex z) const;
    Complex coeff(int k) const;
};

enum class Side { upper, lower };

struct PiecewiseSystem {
    HoloPoly upper;   // Im z > 0
    HoloPoly lower;   // Im z < 0

    const HoloPoly& side(Side s) const { return s == Side::upper ? upper : lower; }
    bool has_exact() const { return upper.exact.has_value() && lower.exact.has_value(); }
};

enum class EqSide { upper, lower, boundary };

struct Equilibrium {
    Complex location;
    EqSide side;
    double residual;
    bool converged;
};

PiecewiseSystem parse_system(const std::string& text);
PiecewiseSystem load_system(const std::string& path);
std::string serialize_system(const PiecewiseSystem& s);

Complex eval_poly(const HoloPoly& p, Complex z);

// Companion-matrix eigenvalues followed by one Newton polish per root.
std::vector<Equilibrium> equilibria(const HoloPoly& p, double tol = 1e-9);

// w = 1/z.  dw/dt = -w^2 F(1/w); the half planes swap, so the image of the
// upper field governs Im w < 0.  Only sides of degree <= 2 are accepted.
PiecewiseSystem invert_at_infinity(const PiecewiseSystem& s);

} // namespace holocyc

#pragma once

#include "holocyc/core.hpp"
#include "holocyc/lyapunov.hpp"

#include <cmath>
#include <vector>

namespace fam {

using holocyc::Complex;
using holocyc::HoloPoly;
using holocyc::PiecewiseSystem;

inline const Complex I{0.0, 1.0};

inline PiecewiseSystem make(std::vector<Complex> up, std::vector<Complex> lo)
{
    return {HoloPoly(std::move(up)), HoloPoly(std::move(lo))};
}

// The quadratic coefficient a_1 + i b_1 with a_1 = b_1 (lambda^2 - 1) / (2 lambda)
// makes V_2 vanish; the printed condition has lambda in the denominator.
inline double weak_real_part(double lambda, double b) { return b * (lambda * lambda - 1) / (2 * lambda); }

// (i + lambda + s1) z + (A + s2) z^2 | (i - lambda) z
inline PiecewiseSystem order3(double lambda, double b1, const std::vector<double>& s)
{
    double a1 = weak_real_part(lambda, b1);
    return make({0.0, I + lambda + s[0], Complex(a1 + s[1], b1)}, {0.0, I - lambda});
}

// (i + lambda + s1) z + (s2 + i s3) z^2 + (B + s4) z^3 | (i - lambda) z
inline PiecewiseSystem order5(double lambda, double b2, const std::vector<double>& s)
{
    double a2 = weak_real_part(lambda, b2);
    return make({0.0, I + lambda + s[0], Complex(s[1], s[2]), Complex(a2 + s[3], b2)}, {0.0, I - lambda});
}

// (i + 1 + s1) z + (A+ + s2) z^2 | (i - 1) z + (A- + i s3) z^2 with the tau parametrization
inline PiecewiseSystem tau_family(double tau, const std::vector<double>& s)
{
    const double ps = holocyc::p_star().value;
    double bp = (ps - tau * (tau + 2)) / (2 * tau);
    double bm = (ps + tau * (tau - 2)) / (2 * tau);
    return make({0.0, I + 1.0 + s[0], Complex(-1 + s[1], bp)}, {0.0, I - 1.0, Complex(1, bm + s[2])});
}

inline double v3_order3(double lambda, double b1)
{
    double E = std::exp(M_PI * lambda);
    return b1 * b1 * E * E * (E * E - 1) * (1 + lambda * lambda) / (8 * lambda * lambda);
}

inline double det_order3(double lambda)
{
    double E = std::exp(M_PI * lambda);
    return -2 * M_PI * E * (E + 1) * lambda / (1 + lambda * lambda);
}

inline double w5_printed(double lambda, double b2)
{
    double E4 = std::exp(4 * M_PI * lambda);
    return -b2 * b2 * E4 * (E4 - 1) * (lambda * lambda - 1) / (2 * (1 + lambda * lambda));
}

inline double det_order5_printed(double lambda, double b2)
{
    double E = std::exp(M_PI * lambda), l2 = lambda * lambda;
    return b2 * std::pow(E, 6) * (E - 1) * std::pow(E + 1, 3) * (1 - E + E * E) * M_PI * (1 + 33 * l2) /
           (12 * (1 + l2) * (1 + 9 * l2));
}

inline double det_tau(double tau)
{
    const double ps = holocyc::p_star().value, e = std::exp(M_PI);
    return M_PI * std::exp(3 * M_PI) / (4 * tau) * (e - 1) * (e + 1) * (e + 1) * (tau * tau + ps);
}

} // namespace fam

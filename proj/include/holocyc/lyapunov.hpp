#pragma once

#include "holocyc/core.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace holocyc {

// F(z) = (i + lambda) z + A z^2 + B z^3 + C z^4 + D z^5 + ...
struct SideSeriesData {
    double lambda = 0.0;
    Complex A, B, C, D;
};

// Requires F(0) = 0 and F'(0) = i + lambda.
SideSeriesData side_data(const HoloPoly& p);
// The lower field enters through G(w) = -F(-w).
SideSeriesData reflected(const SideSeriesData& d);

// Index 0 is unused so that eta[1] is eta_1.  gamma[2] carries the factor
// (2 lambda + i); with (2 lambda - i) the fourth coefficient disagrees with
// direct integration.  The twelve xi and delta_7..delta_10 are replaced by
// the harmonic coefficients of T_5 (xi[0], xi[2], xi[4] multiply e^{0},
// e^{2 i theta}, e^{4 i theta}) and by a direct expansion of the
// (R_2~)^2 R_3 integral, see omega_pi.
struct AppendixConstants {
    std::array<Complex, 7> eta{};
    std::array<Complex, 5> gamma{};
    std::array<Complex, 7> delta{};
    std::array<Complex, 5> xi{};
};

// Throws std::domain_error naming delta_1 / delta_6 when lambda == 0; omega_pi
// never needs them in that form.
AppendixConstants appendix_constants(const SideSeriesData& d);

// Values at theta = pi of the integrals entering u_2..u_5.
struct PiBlocks {
    double R2, R3, R4, R3R2, R4R2, R5, R2R2R3;
};
PiBlocks pi_blocks(const SideSeriesData& d);

// omega_1(pi) .. omega_5(pi); index 0 holds omega_1.
std::array<double, 5> omega_pi(const SideSeriesData& d);

struct LyapunovVector {
    std::array<double, 5> V{};
    std::optional<int> first_nonzero;   // 1-based
    int defined_through = 1;            // V_k is meaningful for k <= defined_through
    double zero_tol = 1e-9;
};

LyapunovVector lyapunov_quantities(const PiecewiseSystem& s, double zero_tol = 1e-9);

// First k in 1..5 with |V_k| > tol; empty means order >= 6 or undetermined.
std::optional<int> weak_focus_order(const PiecewiseSystem& s, double tol = 1e-9);

using Family = std::function<PiecewiseSystem(const std::vector<double>&)>;

// det of d(W_1..W_{k-1})/d(s_1..s_{k-1}) at s = 0, central differences with
// one Richardson step.
double unfolding_jacobian(const Family& family, int k, double h);
std::vector<std::vector<double>> unfolding_matrix(const Family& family, int k, double h);
// One step per parameter, for families whose parameters shift coefficients of
// very different sizes (a step below the spacing of doubles near a large
// coefficient is not resolved).
double unfolding_jacobian(const Family& family, int k, const std::vector<double>& steps);
std::vector<std::vector<double>> unfolding_matrix(const Family& family, int k, const std::vector<double>& steps);

struct SlidingCheck {
    double closed_form;     // d (e^{lambda^- pi} + 1)
    double numeric_limit;   // lim_{x -> 0+} Delta_2(x) from crossing orbits
    bool consistent;
};

// `base` is the family with d = 0: zero constant terms and rotation-normalized
// linear parts.  The lower side receives the constant (i + lambda^+) d.
PiecewiseSystem sliding_system(const PiecewiseSystem& base, double d);
SlidingCheck sliding_constant(const PiecewiseSystem& base, double d);

struct PStar {
    std::array<int, 7> coeffs;   // multiplies e^{k pi}, k = 0..6
    double value;
    std::string digits;          // 40 significant digits
};
PStar p_star();

} // namespace holocyc

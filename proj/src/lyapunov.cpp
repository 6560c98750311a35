#include "holocyc/lyapunov.hpp"

#include "holocyc/flow.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace holocyc {

namespace {

constexpr double pi = std::numbers::pi;
const Complex I(0.0, 1.0);

double re(Complex z) { return z.real(); }
double im(Complex z) { return z.imag(); }

// int_0^pi e^{mu theta} d theta, continuous through mu = 0.
Complex expint(Complex mu)
{
    Complex w = mu * pi;
    if (std::abs(w) < 1e-3)
        return pi * (1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0 + w * w * w * w / 120.0 +
                     w * w * w * w * w / 720.0);
    if (mu.imag() == 0.0) return std::expm1(w.real()) / mu.real();
    return (std::exp(w) - 1.0) / mu;
}

struct EtaGamma {
    std::array<Complex, 7> eta{};
    std::array<Complex, 5> gamma{};
};

EtaGamma eta_gamma(const SideSeriesData& d)
{
    const double l = d.lambda;
    const Complex A = d.A, B = d.B, C = d.C;
    const Complex Ab = std::conj(A), Bb = std::conj(B);
    const Complex p = 1.0 + l * I, pb = 1.0 - l * I, il = I + l;
    EtaGamma r;
    auto& e = r.eta;
    e[1] = p * A * B / (6.0 * il * il) + pb * A * Bb / (2.0 * (l - I) * (3 * l - I)) + A * A * Ab / (2.0 * (I + 3 * l));
    e[2] = p * A * B / (2.0 * il * il) + pb * A * Bb / (2.0 * (1 + l * l)) + A * A * Ab / (2.0 * il);
    e[3] = p * A * A * A / (12.0 * il * il) + p * A * A * Ab / (4.0 * il * (3 * l + I));
    e[4] = p * A * A * A / (4.0 * il * il) + p * A * A * Ab / (4.0 * (1 + l * l));
    e[5] = p * A * A * A / (12.0 * il * il) - p * A * A * Ab / (4.0 * il * (3 * l + I));
    e[6] = p * A * A * A / (4.0 * il * il) - p * A * A * Ab / (4.0 * (1 + l * l));
    auto& g = r.gamma;
    g[1] = p / (3.0 * il) * (-A * A * A / 4.0 + C + I * A * B);
    g[2] = (2 * l + I) * Ab * B / (2.0 * (3 * l + I));
    g[3] = 1.0 / (2.0 * (3 * l - I)) * (il * Ab * Ab * A / 2.0 - A * Bb);
    g[4] = -l * Ab * A * A / (2.0 * (3 * l + I));
    return r;
}

// delta_1 and delta_6 split as (singular numerator)/lambda + regular part.
struct DeltaParts {
    std::array<Complex, 7> regular{};
    std::array<Complex, 7> over_lambda{};
};

DeltaParts delta_parts(const SideSeriesData& d, const std::array<Complex, 5>& g)
{
    const double l = d.lambda;
    const Complex A = d.A, Ab = std::conj(A), il = I + l;
    auto cg = [](Complex z) { return std::conj(z); };
    DeltaParts r;
    auto& x = r.regular;
    r.over_lambda[1] = A / 8.0 * cg(g[2]);
    x[1] = A / 8.0 * (g[1] / il + 2.0 * cg(g[1]) / (2 * l - I) + 2.0 * g[2] / (I + 2 * l));
    x[2] = A / 8.0 * 4.0 * (g[1] + g[2] + cg(g[1]) + cg(g[2])) / il;
    x[3] = A / (8.0 * il * (I + 2 * l)) *
           (-g[3] + cg(g[4]) + 3.0 * I * g[3] * l + 2.0 * I * g[4] * l - 2.0 * I * cg(g[3]) * l -
            3.0 * I * cg(g[4]) * l + 2.0 * l * l * (g[3] + g[4] - cg(g[3]) - cg(g[4])));
    x[4] = A / (8.0 * il * (I + 2 * l)) *
           (4.0 * I * l * (g[3] + g[4] - cg(g[3]) - cg(g[4])) + 8.0 * l * l * (g[3] + g[4] - cg(g[3]) - cg(g[4])));
    x[5] = (4.0 * Ab * (g[3] + g[4]) / (l - I) + 4.0 * A * (g[3] + g[4]) / il) / 8.0;
    r.over_lambda[6] = (A * g[3] + Ab * g[4]) / 8.0;
    x[6] = (2.0 * Ab * g[3] / (2 * l - I) + 2.0 * A * g[4] / (I + 2 * l)) / 8.0;
    return r;
}

std::array<Complex, 5> t5_harmonics(const SideSeriesData& d)
{
    const double l = d.lambda;
    const Complex A = d.A, B = d.B, C = d.C, D = d.D;
    const Complex Ab = std::conj(A), Bb = std::conj(B);
    const Complex A2 = A * A, Ab2 = Ab * Ab;
    std::array<Complex, 5> h{};
    h[0] = A2 * Bb / 8.0 + Ab2 * B / 8.0 +
           l * (3.0 * A2 * Ab2 / 8.0 + 3.0 * I * A2 * Bb / 8.0 - 3.0 * I * Ab2 * B / 8.0 + B * Bb / 2.0);
    h[2] = I * A2 * A * Ab / 8.0 + A * Ab * B / 4.0 + l * (-A2 * A * Ab / 4.0 + 3.0 * I * A * Ab * B / 4.0 + Ab * C / 2.0);
    h[4] = -I * A2 * A2 / 16.0 - 3.0 * A2 * B / 8.0 + I * A * C / 2.0 + I * B * B / 4.0 + D / 2.0 +
           l * (A2 * A2 / 16.0 - 3.0 * I * A2 * B / 8.0 - A * C / 2.0 - B * B / 4.0 + I * D / 2.0);
    return h;
}

// int_0^pi (R_2~)^2 R_3 with R_2~(theta) = Re[k (e^{(lambda+i) theta} - 1)] and
// R_3 = e^{2 lambda theta} (Re[Q e^{2 i theta}] + lambda |A|^2 / 2).
double r2r2r3(const SideSeriesData& d)
{
    const double l = d.lambda;
    const Complex A = d.A;
    const Complex k = (1.0 + l * I) * A / (I + l);
    const Complex Q = (1.0 + l * I) * d.B + (I - l) * A * A / 2.0;
    struct Term {
        Complex c, mu;
    };
    const std::array<Term, 3> r2 = {Term{k / 2.0, l + I}, Term{-(k + std::conj(k)) / 2.0, 0.0},
                                    Term{std::conj(k) / 2.0, l - I}};
    const std::array<Term, 3> r3 = {Term{Q / 2.0, 2 * l + 2.0 * I}, Term{std::conj(Q) / 2.0, 2 * l - 2.0 * I},
                                    Term{l * std::norm(A) / 2.0, 2 * l}};
    Complex sum(0.0, 0.0);
    for (const auto& a : r2)
        for (const auto& b : r2)
            for (const auto& c : r3) sum += a.c * b.c * c.c * expint(a.mu + b.mu + c.mu);
    return sum.real();
}

} // namespace

SideSeriesData side_data(const HoloPoly& p)
{
    if (std::abs(p.coeff(0)) != 0.0) throw std::invalid_argument("side has a constant term");
    Complex a = p.coeff(1);
    if (std::abs(a.imag() - 1.0) > 1e-14)
        throw std::invalid_argument("linear part is not rotation-normalized (needs i + lambda)");
    return {a.real(), p.coeff(2), p.coeff(3), p.coeff(4), p.coeff(5)};
}

SideSeriesData reflected(const SideSeriesData& d) { return {d.lambda, -d.A, d.B, -d.C, d.D}; }

AppendixConstants appendix_constants(const SideSeriesData& d)
{
    if (d.lambda == 0.0)
        throw std::domain_error("delta_1 and delta_6 divide by lambda; lambda = 0 is only reachable as a limit");
    auto eg = eta_gamma(d);
    auto dp = delta_parts(d, eg.gamma);
    AppendixConstants c;
    c.eta = eg.eta;
    c.gamma = eg.gamma;
    for (int i = 1; i <= 6; ++i) c.delta[i] = dp.regular[i] + dp.over_lambda[i] / d.lambda;
    c.xi = t5_harmonics(d);
    return c;
}

PiBlocks pi_blocks(const SideSeriesData& d)
{
    const double l = d.lambda;
    const Complex A = d.A, B = d.B;
    const double E = std::exp(l * pi);
    const double E2m1 = std::expm1(2 * l * pi), E4m1 = std::expm1(4 * l * pi);
    const double q4 = 4.0 * expint(4.0 * l).real();   // (e^{4 lambda pi} - 1) / lambda
    auto eg = eta_gamma(d);
    const auto& e = eg.eta;
    const auto& g = eg.gamma;
    auto dp = delta_parts(d, g);
    const auto& x = dp.regular;
    const auto& y = dp.over_lambda;

    PiBlocks b;
    b.R2 = (-E - 1) * re((1.0 + l * I) * A / (I + l));
    b.R3 = E2m1 * (re((1.0 + l * I) * B / (2.0 * (I + l)) + A * std::conj(A) / 4.0) -
                   im((1.0 + l * I) * A * A / (4.0 * (I + l))));
    b.R4 = (-E * E * E - 1) * (re(g[1] + g[2]) + im(g[3] + g[4]));
    b.R3R2 = 0.5 * (-E * E * E - 1) * (re(e[1] - l * e[5]) - im(l * e[1] + e[3])) -
             0.5 * (-E - 1) * (re(e[2] - l * e[6]) - im(l * e[2] + e[4]));
    // (E4 - 1)(Re[delta_1 + delta_3] + Im[delta_6 - lambda delta_1]), the 1/lambda
    // parts carried by q4
    Complex d1 = E4m1 * x[1] + q4 * y[1];
    Complex d3 = E4m1 * x[3];
    Complex d6 = E4m1 * x[6] + q4 * y[6];
    Complex ld1 = E4m1 * (l * x[1] + y[1]);
    b.R4R2 = re(d1 + d3) + im(d6 - ld1) - (-E - 1) * (re(x[2] + x[4]) + im(x[5] - l * x[2]));
    auto h = t5_harmonics(d);
    b.R5 = re(h[0] * expint(4.0 * l) + 2.0 * h[2] * expint(4.0 * l + 2.0 * I) + 2.0 * h[4] * expint(4.0 * l + 4.0 * I));
    b.R2R2R3 = r2r2r3(d);
    return b;
}

std::array<double, 5> omega_pi(const SideSeriesData& d)
{
    const double l = d.lambda;
    const Complex A = d.A, B = d.B;
    const double E = std::exp(l * pi), E3 = E * E * E;
    auto eg = eta_gamma(d);
    const auto& e = eg.eta;
    const auto& g = eg.gamma;
    auto b = pi_blocks(d);

    std::array<double, 5> w{};
    w[0] = std::expm1(l * pi);
    w[1] = E * (-E - 1) * re((1.0 + l * I) * A / (I + l));
    w[2] = E * std::expm1(2 * l * pi) *
               (re((1.0 + l * I) * B / (2.0 * (I + l)) + A * std::conj(A) / 4.0) -
                im((1.0 + l * I) * A * A / (4.0 * (I + l)))) +
           w[1] * w[1] / E;
    const double w2 = w[1], w3 = w[2];
    w[3] = -2 * w2 * w2 * w2 / (E * E) + 3 * w2 * w3 / E -
           0.5 * E * (-E3 - 1) * (re(e[1] - l * e[5] - 2.0 * (g[1] + g[2])) - im(l * e[1] + e[3] + 2.0 * (g[3] + g[4]))) +
           0.5 * E * (-E - 1) * (re(e[2] - l * e[6]) - im(l * e[2] + e[4]));
    w[4] = -2.5 * std::pow(w2, 4) / (E3) + 2 * w2 * w2 * w3 / (E * E) + 1.5 * w3 * w3 / E +
           E * (b.R5 + b.R2R2R3 - 2 * b.R4R2) -
           w2 * (-E3 - 1) * (re(e[1] - l * e[5] - 4.0 * (g[1] + g[2])) - im(l * e[1] + e[3] + 4.0 * (g[3] + g[4]))) +
           w2 * (-E - 1) * (re(e[2] - l * e[6]) - im(l * e[2] + e[4]));
    return w;
}

LyapunovVector lyapunov_quantities(const PiecewiseSystem& s, double zero_tol)
{
    SideSeriesData up = side_data(s.upper);
    SideSeriesData lo = reflected(side_data(s.lower));
    auto wf = omega_pi(up), wg = omega_pi(lo);
    double f1 = 1 + wf[0], f2 = wf[1], f3 = wf[2], f4 = wf[3], f5 = wf[4];
    double g1 = 1 + wg[0], g2 = wg[1], g3 = wg[2], g4 = wg[3], g5 = wg[4];

    // Taylor coefficients of f^-(f^+(s)) - s, scaled by f_1^{k-1} so that they
    // reduce to the displayed V_k once the earlier ones vanish.
    std::array<double, 5> c{};
    c[0] = std::expm1((up.lambda + lo.lambda) * pi);
    c[1] = g1 * f2 + g2 * f1 * f1;
    c[2] = g1 * f3 + 2 * g2 * f1 * f2 + g3 * f1 * f1 * f1;
    c[3] = g4 * std::pow(f1, 4) + 3 * g3 * f1 * f1 * f2 + g2 * f2 * f2 + 2 * g2 * f1 * f3 + g1 * f4;
    c[4] = g5 * std::pow(f1, 5) + 4 * g4 * std::pow(f1, 3) * f2 + 3 * g3 * f1 * f2 * f2 + 3 * g3 * f1 * f1 * f3 +
           2 * g2 * f2 * f3 + 2 * g2 * f1 * f4 + g1 * f5;

    LyapunovVector v;
    v.zero_tol = zero_tol;
    for (int k = 0; k < 5; ++k) v.V[k] = c[k] * std::pow(f1, k);
    v.defined_through = 5;
    for (int k = 0; k < 5; ++k) {
        if (std::abs(v.V[k]) > zero_tol) {
            v.first_nonzero = k + 1;
            v.defined_through = k + 1;
            break;
        }
    }
    return v;
}

std::optional<int> weak_focus_order(const PiecewiseSystem& s, double tol)
{
    return lyapunov_quantities(s, tol).first_nonzero;
}

std::vector<std::vector<double>> unfolding_matrix(const Family& family, int k, const std::vector<double>& steps)
{
    const int m = k - 1;
    if (m < 1 || m > 4) throw std::invalid_argument("unfolding needs 2 <= k <= 5");
    if (static_cast<int>(steps.size()) != m) throw std::invalid_argument("need one step per parameter");
    std::vector<std::vector<double>> J(m, std::vector<double>(m));
    auto W = [&](const std::vector<double>& s) { return lyapunov_quantities(family(s)).V; };
    for (int j = 0; j < m; ++j) {
        auto diff = [&](double step) {
            std::vector<double> sp(m, 0.0), sm(m, 0.0);
            sp[j] = step;
            sm[j] = -step;
            auto a = W(sp), b = W(sm);
            std::vector<double> out(m);
            for (int i = 0; i < m; ++i) out[i] = (a[i] - b[i]) / (2 * step);
            return out;
        };
        auto d1 = diff(steps[j]), d2 = diff(steps[j] / 2);
        for (int i = 0; i < m; ++i) {
            J[i][j] = (4 * d2[i] - d1[i]) / 3;
            if (!std::isfinite(J[i][j])) throw std::runtime_error("non-finite Lyapunov quantity while differencing");
        }
    }
    return J;
}

std::vector<std::vector<double>> unfolding_matrix(const Family& family, int k, double h)
{
    return unfolding_matrix(family, k, std::vector<double>(std::max(k - 1, 0), h));
}

double unfolding_jacobian(const Family& family, int k, double h)
{
    return unfolding_jacobian(family, k, std::vector<double>(std::max(k - 1, 0), h));
}

double unfolding_jacobian(const Family& family, int k, const std::vector<double>& steps)
{
    auto J = unfolding_matrix(family, k, steps);
    const int m = static_cast<int>(J.size());
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M(i, j) = J[i][j];
    return M.determinant();
}

PiecewiseSystem sliding_system(const PiecewiseSystem& base, double d)
{
    double lp = base.upper.coeff(1).real();
    std::vector<Complex> lower = base.lower.coeffs;
    lower[0] += Complex(lp, 1.0) * d;
    return {HoloPoly(base.upper.coeffs), HoloPoly(lower)};
}

SlidingCheck sliding_constant(const PiecewiseSystem& base, double d)
{
    const double lm = base.lower.coeff(1).real();
    SlidingCheck out;
    out.closed_form = d * (std::exp(lm * pi) + 1);
    PiecewiseSystem s = sliding_system(base, d);
    // Delta_2 from crossing orbits at x0, 2x0, 3x0, extrapolated quadratically
    // to x = 0.  Orbits landing inside the sliding segment are avoided by
    // moving x0 outward.
    double x0 = 2 * std::abs(d) + 1e-3;
    for (int attempt = 0;; ++attempt) {
        try {
            double a = displacement(s, x0), b = displacement(s, 2 * x0), c = displacement(s, 3 * x0);
            out.numeric_limit = 3 * a - 3 * b + c;
            break;
        } catch (const FlowError&) {
            if (attempt > 20) throw;
            x0 *= 1.5;
        }
    }
    out.consistent = std::abs(out.closed_form - out.numeric_limit) <= 1e-10 * std::max(1.0, std::abs(out.closed_form));
    return out;
}

PStar p_star()
{
    using boost::multiprecision::cpp_dec_float_50;
    PStar p{{4, 8, 8, 8, 8, 8, 4}, 0.0, ""};
    cpp_dec_float_50 e = boost::multiprecision::exp(boost::math::constants::pi<cpp_dec_float_50>());
    cpp_dec_float_50 acc = 0, ek = 1;
    for (int k = 0; k <= 6; ++k) {
        acc += p.coeffs[k] * ek;
        ek *= e;
    }
    p.value = acc.convert_to<double>();
    p.digits = acc.str(40, std::ios_base::fmtflags(0));
    return p;
}

} // namespace holocyc

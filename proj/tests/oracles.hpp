#pragma once

// Direct quadrature of the averaged functions from the solutions of the
// averaged equations on each side, independent of the closed forms.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace oracle {

using Coeffs = std::vector<std::pair<double, double>>;
using C = std::complex<double>;

inline C h_at(const Coeffs& c, C z)
{
    C v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + C(it->first, it->second);
    return v;
}

inline C dh_at(const Coeffs& c, C z)
{
    C v = 0.0;
    for (size_t k = c.size(); k-- > 1;) v = v * z + double(k) * C(c[k].first, c[k].second);
    return v;
}

inline double F1(const Coeffs& c, double th, double r)
{
    return (h_at(c, std::polar(r, th)) * std::polar(1.0, -th)).real();
}

inline double F2(const Coeffs& c, double th, double r)
{
    C w = h_at(c, std::polar(r, th)) * std::polar(1.0, -th);
    return -w.real() * w.imag() / r;
}

inline double dF1(const Coeffs& c, double th, double r) { return dh_at(c, std::polar(r, th)).real(); }

template <class F>
double integrate(F f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
}

// M_1 on one side: the integral of F_1 over [0, sigma pi].
inline double M1_side(const Coeffs& c, double r, double sigma)
{
    return integrate([&](double t) { return F1(c, t, r); }, 0.0, sigma * M_PI);
}

inline double M2_side(const Coeffs& c, double r, double sigma)
{
    auto y1 = [&](double t) { return integrate([&](double s) { return F1(c, s, r); }, 0.0, t); };
    return 0.5 * integrate([&](double t) { return 2 * F2(c, t, r) + 2 * dF1(c, t, r) * y1(t); }, 0.0, sigma * M_PI);
}

} // namespace oracle

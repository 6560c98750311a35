#include "holocyc/flow.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace holocyc {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

namespace {

constexpr double pi = std::numbers::pi;

double side_sign(Side s) { return s == Side::upper ? 1.0 : -1.0; }
double dir_sign(Orientation o) { return o == Orientation::forward ? 1.0 : -1.0; }

bool is_linear(const HoloPoly& p) { return p.degree() == 1 && p.coeffs[1] != Complex(0.0, 0.0); }

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

struct Field {
    const HoloPoly& p;
    double sigma;
    void operator()(const State& x, State& dxdt, double) const
    {
        Complex w = sigma * eval_poly(p, Complex(x[0], x[1]));
        dxdt[0] = w.real();
        dxdt[1] = w.imag();
    }
};

// Find the first zero of g on (lo, hi] given g > 0 just right of lo and
// g(hi) <= 0.  When lo is the starting time, g vanishes there too, so the
// caller passes the quotient g(t)/(t-lo) instead.
template <class G, class DG>
double solve_event(G g, DG dg, double lo, double hi, double tol)
{
    for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)) * 1e-3; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) > 0) lo = mid;
        else hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        double d = dg(t);
        if (d == 0.0) break;
        double next = t - g(t) / d;
        if (!(next > lo - tol && next < hi + tol)) break;
        t = next;
    }
    return t;
}

SectionCrossing linear_crossing(const HoloPoly& p, double x0, Side side, Orientation o,
                                const FlowOptions& opt)
{
    double sg = side_sign(side), sd = dir_sign(o);
    Complex a = sd * p.coeffs[1], b = sd * p.coeffs[0];
    Complex z0(x0, 0.0);
    auto z = [&](double t) { return linear_flow(a, b, z0, t); };
    auto g = [&](double t) { return sg * z(t).imag(); };
    auto dg = [&](double t) { return sg * (a * z(t) + b).imag(); };

    double omega = std::abs(a.imag());
    double dt = omega > 0 ? std::min(0.05, pi / (16 * omega)) : 0.05;
    double t_prev = 0.0, t = dt;
    while (true) {
        if (t > opt.max_time)
            throw FlowError(FlowError::divergence, "no return to the section from x=" + fmt(x0));
        Complex zt = z(t);
        if (!std::isfinite(zt.real()) || std::abs(zt) > opt.escape_radius)
            throw FlowError(FlowError::divergence, "orbit escapes from x=" + fmt(x0));
        if (g(t) <= 0) break;
        t_prev = t;
        t += dt;
    }
    double tc;
    if (t_prev == 0.0) {
        auto q = [&](double s) { return g(s) / s; };
        tc = solve_event(q, [&](double s) { return (dg(s) * s - g(s)) / (s * s); }, 0.0, t,
                         opt.event_tol);
    } else {
        tc = solve_event(g, dg, t_prev, t, opt.event_tol);
    }
    return {x0, z(tc).real(), tc, side};
}

SectionCrossing general_crossing(const HoloPoly& p, double x0, Side side, Orientation o,
                                 const FlowOptions& opt)
{
    double sg = side_sign(side);
    Field f{p, dir_sign(o)};
    auto controlled = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(opt.atol, opt.rtol);
    odeint::runge_kutta_fehlberg78<State> plain;

    State x{x0, 0.0};
    double t = 0.0, dt = 1e-3;
    const double max_dt = 0.05;
    while (true) {
        if (t > opt.max_time)
            throw FlowError(FlowError::divergence, "no return to the section from x=" + fmt(x0));
        State x_prev = x;
        double t_prev = t;
        dt = std::min(dt, max_dt);
        if (controlled.try_step(f, x, t, dt) == odeint::fail) continue;
        if (!std::isfinite(x[0]) || std::hypot(x[0], x[1]) > opt.escape_radius)
            throw FlowError(FlowError::divergence, "orbit escapes from x=" + fmt(x0));
        if (sg * x[1] > 0) continue;

        // crossing inside [t_prev, t]: resolve it with single steps from x_prev
        auto at = [&](double tau) {
            State out;
            plain.do_step(f, x_prev, t_prev, out, tau);
            return out;
        };
        auto g = [&](double tau) { return sg * at(tau)[1]; };
        auto dg = [&](double tau) {
            State s = at(tau), d;
            f(s, d, 0.0);
            return sg * d[1];
        };
        double h = t - t_prev, tau;
        if (t_prev == 0.0)
            tau = solve_event([&](double s) { return g(s) / s; },
                              [&](double s) { return (dg(s) * s - g(s)) / (s * s); }, 0.0, h,
                              opt.event_tol);
        else
            tau = solve_event(g, dg, 0.0, h, opt.event_tol);
        State xe = at(tau);
        return {x0, xe[0], t_prev + tau, side};
    }
}

} // namespace

Complex linear_flow(Complex a, Complex b, Complex z0, double t)
{
    if (a == Complex(0.0, 0.0)) throw FlowError(FlowError::unsupported, "linear_flow needs a != 0");
    if (t == 0.0) return z0;
    Complex c = b / a;
    return (z0 + c) * std::exp(a * t) - c;
}

SectionCrossing integrate_to_section(const HoloPoly& p, double x0, Side side, Orientation o,
                                     const FlowOptions& opt)
{
    double lift = side_sign(side) * dir_sign(o) * eval_poly(p, Complex(x0, 0.0)).imag();
    double scale = 1.0;
    for (const auto& c : p.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(lift) <= 1e-14 * scale * std::max(1.0, std::abs(x0)))
        throw FlowError(FlowError::tangency, "field tangent to the section at x=" + fmt(x0));
    if (lift < 0)
        throw FlowError(FlowError::wrong_side, "orbit from x=" + fmt(x0) + " leaves into the other half plane");
    return is_linear(p) ? linear_crossing(p, x0, side, o, opt) : general_crossing(p, x0, side, o, opt);
}

double half_return(const PiecewiseSystem& s, Side side, double x, const FlowOptions& opt)
{
    if (side == Side::upper) return std::abs(integrate_to_section(s.upper, x, Side::upper, Orientation::forward, opt).end);
    return std::abs(integrate_to_section(s.lower, -x, Side::lower, Orientation::forward, opt).end);
}

double return_map(const PiecewiseSystem& s, double x, const FlowOptions& opt)
{
    auto up = integrate_to_section(s.upper, x, Side::upper, Orientation::forward, opt);
    return integrate_to_section(s.lower, up.end, Side::lower, Orientation::forward, opt).end;
}

double return_time(const PiecewiseSystem& s, double x, const FlowOptions& opt)
{
    auto up = integrate_to_section(s.upper, x, Side::upper, Orientation::forward, opt);
    auto lo = integrate_to_section(s.lower, up.end, Side::lower, Orientation::forward, opt);
    return up.flight_time + lo.flight_time;
}

double displacement(const PiecewiseSystem& s, double x, const FlowOptions& opt)
{
    return return_map(s, x, opt) - x;
}

double displacement1(const PiecewiseSystem& s, double x, const FlowOptions& opt)
{
    auto up = integrate_to_section(s.upper, x, Side::upper, Orientation::forward, opt);
    auto back = integrate_to_section(s.lower, x, Side::lower, Orientation::backward, opt);
    return up.end - back.end;
}

CycleScan find_cycles(const PiecewiseSystem& s, double x_min, double x_max, int grid,
                      const FlowOptions& opt)
{
    if (!(x_min > 0 && x_min < x_max) || grid < 2)
        throw std::invalid_argument("find_cycles needs 0 < x_min < x_max and grid >= 2");
    CycleScan scan;
    auto delta = [&](double x) {
        try {
            return displacement(s, x, opt);
        } catch (const FlowError&) {
            return std::nan("");
        }
    };
    std::vector<double> xs(grid), ds(grid);
    for (int i = 0; i < grid; ++i) {
        xs[i] = x_min + (x_max - x_min) * i / (grid - 1);
        ds[i] = delta(xs[i]);
    }
    for (int i = 0; i + 1 < grid; ++i) {
        double a = xs[i], b = xs[i + 1], fa = ds[i], fb = ds[i + 1];
        if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
        // sign flips of pure integration noise (a center) are not cycles
        double noise = 10 * opt.rtol * std::max(1.0, b);
        if (std::abs(fa) < noise && std::abs(fb) < noise) continue;
        double root;
        if (fa == 0.0 && i == 0) root = a;
        else if (fb == 0.0) root = b;
        else if (fa * fb < 0) {
            std::uintmax_t iters = 200;
            auto tol = [](double l, double r) { return std::abs(r - l) <= 1e-15 * std::max(1.0, std::abs(l)); };
            try {
                auto br = boost::math::tools::toms748_solve(delta, a, b, fa, fb, tol, iters);
                root = 0.5 * (br.first + br.second);
            } catch (const std::exception& e) {
                scan.failures.push_back("bracket [" + fmt(a) + ", " + fmt(b) + "]: " + e.what());
                continue;
            }
        } else {
            continue;
        }
        double res = delta(root);
        if (!std::isfinite(res) || std::abs(res) > 1e-8 * std::max(1.0, std::abs(root))) {
            scan.failures.push_back("bracket [" + fmt(a) + ", " + fmt(b) + "] is a jump, not a zero");
            continue;
        }
        double h = 1e-5 * std::max(1.0, std::abs(root));
        double slope;
        try {
            slope = (return_map(s, root + h, opt) - return_map(s, root - h, opt)) / (2 * h);
        } catch (const FlowError& e) {
            scan.failures.push_back("slope at " + fmt(root) + ": " + e.what());
            continue;
        }
        Stability st = std::abs(slope - 1.0) < 1e-9 ? Stability::nonhyperbolic
                       : slope < 1.0                 ? Stability::attracting
                                                     : Stability::repelling;
        scan.cycles.push_back({root, return_time(s, root, opt), slope, st, std::abs(res)});
    }
    return scan;
}

namespace {

std::vector<Complex> sample_side(const HoloPoly& p, double x0, double T, int n, const FlowOptions& opt)
{
    std::vector<Complex> out;
    if (is_linear(p)) {
        for (int i = 0; i <= n; ++i) out.push_back(linear_flow(p.coeffs[1], p.coeffs[0], Complex(x0, 0.0), T * i / n));
        return out;
    }
    Field f{p, 1.0};
    State x{x0, 0.0};
    out.emplace_back(x0, 0.0);
    auto controlled = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(opt.atol, opt.rtol);
    for (int i = 1; i <= n; ++i) {
        odeint::integrate_adaptive(controlled, f, x, T * (i - 1) / n, T * i / n, T / n / 4);
        out.emplace_back(x[0], x[1]);
    }
    return out;
}

} // namespace

std::vector<TrajectoryPoint> trajectory(const PiecewiseSystem& s, double x, int n, const FlowOptions& opt)
{
    auto up = integrate_to_section(s.upper, x, Side::upper, Orientation::forward, opt);
    auto lo = integrate_to_section(s.lower, up.end, Side::lower, Orientation::forward, opt);
    std::vector<TrajectoryPoint> out;
    auto a = sample_side(s.upper, x, up.flight_time, n, opt);
    for (int i = 0; i <= n; ++i) out.push_back({up.flight_time * i / n, a[i].real(), a[i].imag(), Side::upper});
    auto b = sample_side(s.lower, up.end, lo.flight_time, n, opt);
    for (int i = 1; i <= n; ++i)
        out.push_back({up.flight_time + lo.flight_time * i / n, b[i].real(), b[i].imag(), Side::lower});
    return out;
}

SeriesMap return_series_oracle(const HoloPoly& p, int order, double radius_scale)
{
    if (order < 1 || order > 8) throw std::invalid_argument("oracle order must be in 1..8");
    if (std::abs(p.coeff(0)) != 0.0) throw std::invalid_argument("oracle needs p(0) = 0");
    if (!(p.coeff(1).imag() > 0)) throw std::invalid_argument("oracle needs Im p'(0) > 0");

    // dr/dtheta = sum r^k Re S_k / sum r^(k-1) Im S_k,  S_k = A_k e^{i(k-1)theta},
    // continued to complex r.
    const int n = p.degree();
    auto rhs = [&](const State& x, State& dxdt, double th) {
        Complex r(x[0], x[1]), rk(1.0, 0.0), num(0.0, 0.0), den(0.0, 0.0);
        for (int k = 1; k <= n; ++k) {
            Complex sk = p.coeffs[k] * std::exp(Complex(0.0, (k - 1) * th));
            den += rk * sk.imag();
            rk *= r;
            num += rk * sk.real();
        }
        Complex v = num / den;
        dxdt[0] = v.real();
        dxdt[1] = v.imag();
    };
    // Fourier coefficients of R(pi, s) - s on the circle |s| = rho.
    const int N = 64;
    auto fourier = [&](double rho) {
        std::vector<Complex> vals(N), c(N);
        for (int j = 0; j < N; ++j) {
            if (j > 0 && !std::isfinite(std::abs(vals[j - 1]))) return std::vector<Complex>(N, Complex(NAN, NAN));
            Complex s0 = rho * std::exp(Complex(0.0, 2 * pi * j / N));
            State x{s0.real(), s0.imag()};
            auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(1e-17, 1e-14);
            // outside the disc of convergence the continued solution can run
            // into a pole; give up on this radius then
            double t = 0.0, dt = 1e-3;
            for (int tries = 0; t < pi; ++tries) {
                if (tries > 20000 || !std::isfinite(x[0]) || !std::isfinite(x[1])) {
                    x = {NAN, NAN};
                    break;
                }
                dt = std::min(dt, pi - t);
                stepper.try_step(rhs, x, t, dt);
            }
            vals[j] = Complex(x[0], x[1]) - s0;
        }
        for (int k = 0; k < N; ++k) {
            for (int j = 0; j < N; ++j) c[k] += vals[j] * std::exp(Complex(0.0, -2 * pi * j * k / N));
            c[k] /= double(N);
        }
        return c;
    };
    // A fixed radius is used as given.  Otherwise the largest radius whose
    // upper harmonics have decayed is taken: a large radius loses nothing to
    // the integrator's rounding but must stay inside the disc of convergence.
    std::vector<Complex> c;
    double rho = radius_scale;
    if (rho > 0) {
        c = fourier(rho);
    } else {
        for (rho = 0.4;; rho /= 2) {
            c = fourier(rho);
            double head = 0.0, tail = 0.0;
            bool finite = true;
            for (int k = 1; k < N; ++k) {
                finite = finite && std::isfinite(std::abs(c[k]));
                if (k <= order) head = std::max(head, std::abs(c[k]));
                if (k >= N / 2) tail = std::max(tail, std::abs(c[k]));
            }
            if (finite && tail <= 1e-13 * std::max(head, rho)) break;
            if (rho < 1e-3) throw std::runtime_error("series oracle: no radius with decaying harmonics");
        }
    }
    SeriesMap m;
    m.coeffs.assign(order + 1, 0.0);
    for (int k = 1; k <= order; ++k) m.coeffs[k] = c[k].real() / std::pow(rho, k);
    return m;
}

} // namespace holocyc

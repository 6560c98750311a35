#include "holocyc/averaging.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

namespace holocyc {

namespace {

constexpr double pi = std::numbers::pi;

using Coeffs = std::vector<std::pair<double, double>>;

double a_of(const Coeffs& c, int k) { return k >= 0 && k < static_cast<int>(c.size()) ? c[k].first : 0.0; }
double b_of(const Coeffs& c, int k) { return k >= 0 && k < static_cast<int>(c.size()) ? c[k].second : 0.0; }

void add(std::vector<double>& v, int k, double x)
{
    if (static_cast<int>(v.size()) <= k) v.resize(k + 1, 0.0);
    v[k] += x;
}

// M_1^{+-}(r) = 2 b_0 +- pi a_1 r - 2 sum b_{2k} r^{2k} / (2k - 1)
std::vector<double> m1_side(const Coeffs& c, double sigma)
{
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<double> m(2, 0.0);
    m[0] = 2 * b_of(c, 0);
    m[1] = sigma * pi * a_of(c, 1);
    for (int k = 1; k <= n / 2; ++k) add(m, 2 * k, -2 * b_of(c, 2 * k) / (2 * k - 1));
    return m;
}

double U(const Coeffs& c, int k)
{
    // -(2^{k+1} k!/(2k)!) times (2k-2)!/(2^{k-2}(k-1)!) is -4/(2k-1); the b
    // prefactor reduces the same way to -2/(2k-1).
    double sum = 0.0;
    for (int s = 0; 2 * s <= 2 * k + 1; ++s) {
        int t = 2 * k + 1 - 2 * s;
        sum += 4.0 * a_of(c, 2 * s) * a_of(c, t) + 2.0 * (t - 2 * s) / (2 * s - 1) * b_of(c, 2 * s) * b_of(c, t);
    }
    return -sum / (2 * k - 1);
}

std::vector<double> m2_side(const Coeffs& c, double sigma)
{
    const int n = static_cast<int>(c.size()) - 1;
    auto a = [&](int k) { return a_of(c, k); };
    auto b = [&](int k) { return b_of(c, k); };
    std::vector<double> m(2, 0.0);
    m[0] = 4 * a(1) * a(0) - 2 * b(0) * b(1);
    m[1] = sigma * pi * (-a(1) * b(1) - 2 * b(0) * a(2) - 2 * b(2) * a(0));
    for (int k = 1; k <= n - 1; ++k) add(m, 2 * k, U(c, k));
    for (int k = 1; k <= (n - 1) / 2; ++k) add(m, 2 * k + 1, sigma * pi * a(1) * b(2 * k + 1));
    return m;
}

RealPoly difference(std::vector<double> up, const std::vector<double>& lo)
{
    for (size_t k = 0; k < lo.size(); ++k) add(up, static_cast<int>(k), -lo[k]);
    return RealPoly(std::move(up));
}

// Exponents of the monomials the averaged function of `order` can carry.
std::vector<int> monomials(int n_plus, int n_minus, int order)
{
    const int n = std::max(n_plus, n_minus);
    std::set<int> e{0, 1};
    if (order == 1) {
        for (int k = 1; k <= n / 2; ++k) e.insert(2 * k);
    } else {
        for (int k = 1; k <= n - 1; ++k) e.insert(2 * k);
        for (int k = 1; k <= (n - 1) / 2; ++k) e.insert(2 * k + 1);
    }
    return {e.begin(), e.end()};
}

// Monic combination of the first m+1 monomials vanishing at the m targets.
std::vector<double> interpolating_coeffs(const std::vector<double>& r, const std::vector<int>& powers)
{
    const int m = static_cast<int>(r.size());
    std::vector<double> c(powers[m] + 1, 0.0);
    c[powers[m]] = 1.0;
    if (m == 0) return c;
    Eigen::MatrixXd V(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) V(i, j) = std::pow(r[i], powers[j]);
        rhs(i) = -std::pow(r[i], powers[m]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (lu.rank() < m) throw std::invalid_argument("targets give a singular interpolation system");
    Eigen::VectorXd x = lu.solve(rhs);
    for (int j = 0; j < m; ++j) c[powers[j]] = x(j);
    return c;
}

PerturbationPair realize_order1(const std::vector<double>& c, int n_plus, int n_minus)
{
    PerturbationPair p{Coeffs(n_plus + 1, {0.0, 0.0}), Coeffs(n_minus + 1, {0.0, 0.0})};
    auto at = [&](int k) { return k < static_cast<int>(c.size()) ? c[k] : 0.0; };
    p.upper[0].second = at(0) / 2;
    p.upper[1].first = at(1) / pi;
    for (int k = 1; 2 * k < static_cast<int>(c.size()); ++k) {
        double v = at(2 * k);
        if (v == 0.0) continue;
        if (2 * k <= n_plus) p.upper[2 * k].second = -v * (2 * k - 1) / 2;
        else p.lower[2 * k].second = v * (2 * k - 1) / 2;
    }
    return p;
}

// a_1^+ = -a_1^- and every b_{2k} = 0 keep M_1 identically zero.  The
// remaining a_k and the odd b_k are fitted by Gauss-Newton from seeded starts;
// among the converged fits the one of least norm is kept, since the O(eps^3)
// part of the displacement grows with the size of h.
PerturbationPair realize_order2(const std::vector<double>& target, int n_plus, int n_minus)
{
    struct Slot {
        bool upper;
        int k;
        bool imag;
    };
    std::vector<Slot> slots;
    for (int side = 0; side < 2; ++side) {
        int n = side == 0 ? n_plus : n_minus;
        for (int k = 0; k <= n; ++k) {
            if (k != 1) slots.push_back({side == 0, k, false});
            if (k % 2 == 1) slots.push_back({side == 0, k, true});
        }
    }
    const int nv = static_cast<int>(slots.size()) + 1;   // last entry is a_1^-
    auto build = [&](const Eigen::VectorXd& x) {
        PerturbationPair p{Coeffs(n_plus + 1, {0.0, 0.0}), Coeffs(n_minus + 1, {0.0, 0.0})};
        p.upper[1].first = -x(nv - 1);
        p.lower[1].first = x(nv - 1);
        for (size_t i = 0; i < slots.size(); ++i) {
            auto& e = (slots[i].upper ? p.upper : p.lower)[slots[i].k];
            (slots[i].imag ? e.second : e.first) = x(i);
        }
        return p;
    };
    const int neq = static_cast<int>(target.size());
    auto residual = [&](const Eigen::VectorXd& x) {
        auto m = averaged_M2(build(x));
        Eigen::VectorXd f(neq);
        for (int i = 0; i < neq; ++i) f(i) = (i < static_cast<int>(m.coeffs.size()) ? m.coeffs[i] : 0.0) - target[i];
        return f;
    };
    double scale = 1.0;
    for (double v : target) scale = std::max(scale, std::abs(v));
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::optional<Eigen::VectorXd> best;
    for (int restart = 0; restart < 40; ++restart) {
        Eigen::VectorXd x(nv);
        for (int i = 0; i < nv; ++i) x(i) = dist(rng);
        for (int it = 0; it < 80; ++it) {
            Eigen::VectorXd f = residual(x);
            if (f.norm() <= 1e-14 * scale) break;
            Eigen::MatrixXd J(neq, nv);
            for (int j = 0; j < nv; ++j) {
                Eigen::VectorXd xp = x, xm = x;
                xp(j) += 0.5;
                xm(j) -= 0.5;
                J.col(j) = residual(xp) - residual(xm);   // exact: residual is quadratic
            }
            Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-f);
            double t = 1.0;
            while (t > 1e-4 && residual(x + t * step).norm() >= f.norm()) t /= 2;
            x += t * step;
        }
        if (residual(x).norm() <= 1e-12 * scale && std::abs(x(nv - 1)) > 1e-6 &&
            (!best || x.norm() < best->norm()))
            best = x;
    }
    if (!best) throw std::runtime_error("could not realize the requested second order averaged function");
    return build(*best);
}

} // namespace

RealPoly::RealPoly(std::vector<double> c) : coeffs(std::move(c))
{
    while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
}

double RealPoly::operator()(double r) const
{
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * r + *it;
    return v;
}

RealPoly RealPoly::derivative() const
{
    std::vector<double> d;
    for (size_t k = 1; k < coeffs.size(); ++k) d.push_back(k * coeffs[k]);
    return RealPoly(std::move(d));
}

bool RealPoly::is_zero(double tol) const
{
    return std::all_of(coeffs.begin(), coeffs.end(), [&](double c) { return std::abs(c) <= tol; });
}

RealPoly averaged_M1(const PerturbationPair& p) { return difference(m1_side(p.upper, 1), m1_side(p.lower, -1)); }

RealPoly averaged_M2(const PerturbationPair& p, double tol)
{
    if (!averaged_M1(p).is_zero(tol)) throw std::invalid_argument("M_1 is not identically zero");
    return difference(m2_side(p.upper, 1), m2_side(p.lower, -1));
}

int descartes_bound(const RealPoly& q)
{
    if (q.is_zero()) throw std::invalid_argument("Descartes bound of the zero polynomial");
    int changes = 0;
    double prev = 0.0;
    for (double c : q.coeffs) {
        if (c == 0.0) continue;
        if (prev != 0.0 && (c > 0) != (prev > 0)) ++changes;
        prev = c;
    }
    return changes;
}

std::vector<double> positive_zeros(const RealPoly& q)
{
    std::vector<double> out;
    if (q.is_zero()) return out;
    // drop the factor r^m so the companion matrix is regular at 0
    size_t low = 0;
    while (q.coeffs[low] == 0.0) ++low;
    std::vector<double> c(q.coeffs.begin() + low, q.coeffs.end());
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return out;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -c[i] / c[n];
    Eigen::VectorXcd ev = C.eigenvalues();
    RealPoly red(c), dred = red.derivative();
    for (int i = 0; i < n; ++i) {
        if (std::abs(ev(i).imag()) > 1e-7 * std::max(1.0, std::abs(ev(i))) || ev(i).real() <= 0) continue;
        double x = ev(i).real();
        for (int it = 0; it < 8; ++it) {
            double d = dred(x);
            if (d == 0.0) break;
            x -= red(x) / d;
        }
        if (x > 0) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, b); }),
              out.end());
    return out;
}

int max_zeros(int n_plus, int n_minus, int order)
{
    const int n = std::max(n_plus, n_minus);
    if (order == 1) return n / 2 + 1;
    if (order == 2) return (3 * n - 1) / 2;
    throw std::invalid_argument("averaging order must be 1 or 2");
}

PerturbationPair realize_zeros(const std::vector<double>& targets, int n_plus, int n_minus, int order)
{
    if (n_plus < 1 || n_minus < 1) throw std::invalid_argument("perturbation degrees must be at least 1");
    const int cap = max_zeros(n_plus, n_minus, order);
    if (static_cast<int>(targets.size()) > cap)
        throw std::invalid_argument("infeasible: " + std::to_string(targets.size()) + " zeros requested, at most " +
                                    std::to_string(cap) + " are available");
    std::vector<double> r = targets;
    std::sort(r.begin(), r.end());
    for (size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0)) throw std::invalid_argument("targets must be positive");
        if (i > 0 && r[i] - r[i - 1] <= 1e-9 * r[i]) throw std::invalid_argument("targets collide");
    }
    auto powers = monomials(n_plus, n_minus, order);
    auto c = interpolating_coeffs(r, powers);
    RealPoly m(c), dm = m.derivative();
    for (double x : r)
        if (std::abs(dm(x)) <= 1e-9 * std::max(1.0, std::abs(m.coeffs.back())))
            throw std::invalid_argument("requested zero is not simple");
    return order == 1 ? realize_order1(c, n_plus, n_minus) : realize_order2(c, n_plus, n_minus);
}

PiecewiseSystem perturbed_system(const PerturbationPair& p, double eps)
{
    auto side = [&](const Coeffs& c) {
        std::vector<Complex> out(std::max<size_t>(c.size(), 2), Complex(0.0, 0.0));
        for (size_t k = 0; k < c.size(); ++k) out[k] = eps * Complex(c[k].first, c[k].second);
        out[1] += Complex(0.0, 1.0);
        return HoloPoly(out);
    };
    return {side(p.upper), side(p.lower)};
}

PredictionReport predict_cycles(const PerturbationPair& p, int order, double eps, int grid, const FlowOptions& opt)
{
    RealPoly m = order == 1 ? averaged_M1(p) : averaged_M2(p);
    PredictionReport rep;
    std::vector<double> zeros;
    RealPoly dm = m.derivative();
    for (double z : positive_zeros(m)) {
        if (std::abs(dm(z)) > 1e-9) zeros.push_back(z);
        else rep.notes.push_back("multiple zero at " + std::to_string(z) + " skipped");
    }
    double lo = zeros.empty() ? 0.1 : 0.5 * zeros.front();
    double hi = zeros.empty() ? 2.0 : 1.5 * zeros.back();
    auto scan = find_cycles(perturbed_system(p, eps), lo, hi, grid, opt);
    rep.observed_count = static_cast<int>(scan.cycles.size());
    for (const auto& f : scan.failures) rep.notes.push_back(f);

    std::vector<int> used(scan.cycles.size(), 0);
    for (double z : zeros) {
        CyclePrediction c{z, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()};
        int best = -1;
        for (size_t i = 0; i < scan.cycles.size(); ++i) {
            double e = std::abs(scan.cycles[i].section_point - z);
            if (e < c.error) {
                c.error = e;
                c.observed = scan.cycles[i].section_point;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) ++used[best];
        rep.pairs.push_back(c);
    }
    rep.ambiguous = rep.observed_count != static_cast<int>(zeros.size()) ||
                    std::any_of(used.begin(), used.end(), [](int u) { return u > 1; });
    if (rep.ambiguous) rep.notes.push_back("pairing of predicted and observed cycles is ambiguous; eps may be too large");
    return rep;
}

} // namespace holocyc

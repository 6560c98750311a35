#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "families.hpp"
#include "holocyc/flow.hpp"
#include "holocyc/lyapunov.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace holocyc;
using fam::I;

namespace {

HoloPoly side(double lambda, Complex A, Complex B = 0.0, Complex C = 0.0, Complex D = 0.0)
{
    return HoloPoly(std::vector<Complex>{0.0, I + lambda, A, B, C, D});
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("side data")
{
    auto d = side_data(side(0.3, {1, 2}, {3, 4}));
    CHECK(d.lambda == 0.3);
    CHECK(d.A == Complex(1, 2));
    CHECK(d.B == Complex(3, 4));
    auto r = reflected(d);
    CHECK(r.A == Complex(-1, -2));
    CHECK(r.B == Complex(3, 4));
    CHECK_THROWS_AS(side_data(HoloPoly(std::vector<Complex>{1.0, I})), std::invalid_argument);
    CHECK_THROWS_AS(side_data(HoloPoly(std::vector<Complex>{0.0, 2.0 * I})), std::invalid_argument);
    CHECK_THROWS_AS(appendix_constants(side_data(side(0.0, I))), std::domain_error);
}

TEST_CASE("omega at pi for simple sides")
{
    auto w = omega_pi(side_data(side(1.0, 0.0)));
    CHECK(w[0] == doctest::Approx(std::exp(M_PI) - 1).epsilon(1e-14));
    for (int k = 1; k < 5; ++k) CHECK(w[k] == 0.0);

    auto q = omega_pi(side_data(side(0.0, I)));
    CHECK(q[0] == 0.0);
    CHECK(q[1] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("omega at pi agrees with the series oracle on random sides")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1, 1), mag(0.05, 0.5);
    std::bernoulli_distribution sign;
    for (int trial = 0; trial < 20; ++trial) {
        double lambda = (sign(rng) ? 1 : -1) * mag(rng);
        HoloPoly p = side(lambda, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)});
        auto w = omega_pi(side_data(p));
        auto oracle = return_series_oracle(p, 5);
        for (int k = 1; k <= 5; ++k) {
            INFO("trial ", trial, " k ", k);
            CHECK(std::abs(w[k - 1] - oracle.coeffs[k]) <= 1e-7 * std::max(1.0, std::abs(oracle.coeffs[k])));
        }
    }
}

TEST_CASE("omega is continuous through lambda = 0")
{
    for (Complex A : {Complex(0.3, 0.7), Complex(-0.5, 0.2)}) {
        auto at0 = omega_pi(side_data(side(0.0, A, {0.2, -0.1}, {0.1, 0.3}, {-0.2, 0.05})));
        for (double l : {-1e-6, 1e-6}) {
            auto w = omega_pi(side_data(side(l, A, {0.2, -0.1}, {0.1, 0.3}, {-0.2, 0.05})));
            for (int k = 0; k < 5; ++k) CHECK(std::abs(w[k] - at0[k]) < 1e-4 * std::max(1.0, std::abs(at0[k])));
        }
    }
}

TEST_CASE("smooth systems have vanishing quantities")
{
    // the same holomorphic field on both sides is a center at a nondegenerate
    // linear part with lambda = 0
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        HoloPoly p = side(0.0, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)});
        auto v = lyapunov_quantities({p, p});
        for (int k = 0; k < 5; ++k) CHECK(std::abs(v.V[k]) <= 1e-10);
        CHECK_FALSE(v.first_nonzero.has_value());
    }
}

TEST_CASE("V_1 and the linear focus")
{
    auto v = lyapunov_quantities({side(0.2, 0.0), side(0.1, 0.0)});
    CHECK(v.V[0] == doctest::Approx(std::expm1(0.3 * M_PI)).epsilon(1e-14));
    REQUIRE(v.first_nonzero);
    CHECK(*v.first_nonzero == 1);
    CHECK(v.defined_through == 1);
    CHECK(weak_focus_order({side(0.4, 0.0), side(-0.4, 0.0)}) == std::nullopt);
}

TEST_CASE("order three family")
{
    for (double lambda : {-0.6, 0.3, 0.8}) {
        for (double b1 : {0.5, 1.0}) {
            auto s = fam::order3(lambda, b1, {0.0, 0.0});
            auto v = lyapunov_quantities(s);
            CHECK(std::abs(v.V[0]) < 1e-12);
            CHECK(std::abs(v.V[1]) < 1e-10);
            CHECK(rel_close(v.V[2], fam::v3_order3(lambda, b1), 1e-9));
            CHECK(weak_focus_order(s) == 3);
        }
        Family f = [lambda](const std::vector<double>& s) { return fam::order3(lambda, 0.7, s); };
        CHECK(rel_close(unfolding_jacobian(f, 3, 1e-4), fam::det_order3(lambda), 1e-6));
    }
}

TEST_CASE("order five family")
{
    for (double lambda : {0.4, 0.7}) {
        const double b2 = 0.8, E4 = std::exp(4 * M_PI * lambda), l2 = lambda * lambda;
        auto v = lyapunov_quantities(fam::order5(lambda, b2, {0, 0, 0, 0}));
        for (int k = 0; k < 4; ++k) CHECK(std::abs(v.V[k]) < 1e-8 * std::abs(v.V[4]));
        CHECK(v.first_nonzero == 5);
        // direct expansion of the return map gives this V_5
        double v5 = (1 + l2) / (16 * l2) * b2 * b2 * E4 * (E4 - 1);
        CHECK(rel_close(v.V[4], v5, 1e-8));
        CHECK_FALSE(rel_close(v.V[4], fam::w5_printed(lambda, b2), 0.1));

        Family g = [lambda, b2](const std::vector<double>& s) { return fam::order5(lambda, b2, s); };
        auto J = unfolding_matrix(g, 5, 1e-3);
        double E = std::exp(M_PI * lambda), E2 = E * E;
        // rows of W_2 and W_3 in closed form
        CHECK(rel_close(J[1][2], E * (E + 1) * (l2 - 1) / (1 + l2), 1e-6));
        CHECK(rel_close(J[1][1], -2 * E * (E + 1) * lambda / (1 + l2), 1e-6));
        CHECK(rel_close(J[2][3], E2 * (E2 - 1) * lambda / (1 + l2), 1e-6));
        CHECK(rel_close(J[2][0], -b2 * E2 * (E2 - 1) / (2 * lambda), 1e-6));
        CHECK(std::abs(unfolding_jacobian(g, 5, 1e-3)) > 1.0);
    }
}

TEST_CASE("tau family")
{
    auto ps = p_star();
    for (double tau : {0.5, 1.0, 2.0}) {
        Family f = [tau](const std::vector<double>& s) { return fam::tau_family(tau, s); };
        auto v = lyapunov_quantities(f({0, 0, 0}));
        CHECK(std::abs(v.V[0]) < 1e-12);
        CHECK(std::abs(v.V[1]) < 1e-9 * std::abs(v.V[2]));
        // V_3 does not vanish at s = 0, so the family has order three
        CHECK(v.first_nonzero == 3);
        // the parameters s_2, s_3 move coefficients of size p*/tau, so their
        // steps scale with them
        double bp = (ps.value - tau * (tau + 2)) / (2 * tau);
        double bm = (ps.value + tau * (tau - 2)) / (2 * tau);
        double eps = std::sqrt(std::numeric_limits<double>::epsilon());
        double det = unfolding_jacobian(f, 4, std::vector<double>{1e-2, eps * std::abs(bp), eps * std::abs(bm)});
        CHECK(rel_close(det, fam::det_tau(tau), 1e-5));
    }
}

TEST_CASE("unfolding rejects bad inputs")
{
    Family f = [](const std::vector<double>& s) { return fam::order3(0.5, 1.0, s); };
    CHECK_THROWS_AS(unfolding_jacobian(f, 1, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(unfolding_jacobian(f, 3, std::vector<double>{1e-3}), std::invalid_argument);
    // a family whose parameters do not touch the quantities has det 0
    Family inert = [](const std::vector<double>&) { return fam::order3(0.5, 1.0, {0, 0}); };
    CHECK(unfolding_jacobian(inert, 3, 1e-3) == 0.0);
}

TEST_CASE("bifurcating two small cycles from an order three focus")
{
    // choose s so that the displacement x (V_1 + V_2 x + V_3 x^2) has zeros at r1, r2
    const double lambda = 0.5, b1 = 1.0, r1 = 1e-3, r2 = 2e-3;
    Family f = [&](const std::vector<double>& s) { return fam::order3(lambda, b1, s); };
    auto target = [&](const std::vector<double>& s) {
        auto v = lyapunov_quantities(f(s)).V;
        double f1 = std::exp(lambda * M_PI);
        double c1 = v[0], c2 = v[1] / f1, c3 = v[2] / (f1 * f1);
        return Eigen::Vector2d(c1 - c3 * r1 * r2, c2 + c3 * (r1 + r2));
    };
    std::vector<double> s{0.0, 0.0};
    for (int it = 0; it < 20; ++it) {
        Eigen::Vector2d F = target(s);
        if (F.norm() < 1e-14) break;
        Eigen::Matrix2d J;
        for (int j = 0; j < 2; ++j) {
            auto sp = s, sm = s;
            sp[j] += 1e-7;
            sm[j] -= 1e-7;
            J.col(j) = (target(sp) - target(sm)) / 2e-7;
        }
        Eigen::Vector2d ds = J.fullPivLu().solve(-F);
        s[0] += ds[0];
        s[1] += ds[1];
    }
    auto scan = find_cycles(f(s), 2e-4, 5e-3, 400);
    REQUIRE(scan.cycles.size() == 2);
    CHECK(scan.cycles[0].section_point == doctest::Approx(r1).epsilon(0.1));
    CHECK(scan.cycles[1].section_point == doctest::Approx(r2).epsilon(0.1));
}

TEST_CASE("sliding constant")
{
    const double l = 0.05;
    PiecewiseSystem base{side(l, 0.0), side(l, 0.0)};
    auto zero = sliding_constant(base, 0.0);
    CHECK(zero.closed_form == 0.0);
    CHECK(std::abs(zero.numeric_limit) < 1e-10);

    PiecewiseSystem flat{side(0.0, 0.0), side(0.0, 0.0)};
    CHECK(sliding_constant(flat, 0.01).closed_form == doctest::Approx(0.02).epsilon(1e-14));

    // for equal linear parts the limit from crossing orbits is the closed form
    // with the opposite sign
    for (double d : {-0.01, 0.01}) {
        auto r = sliding_constant(base, d);
        CHECK(r.closed_form == doctest::Approx(d * (std::exp(l * M_PI) + 1)).epsilon(1e-14));
        CHECK(r.numeric_limit == doctest::Approx(-r.closed_form).epsilon(1e-6));
        CHECK_FALSE(r.consistent);
    }
}

TEST_CASE("p star")
{
    auto p = p_star();
    CHECK(p.coeffs == std::array<int, 7>{4, 8, 8, 8, 8, 8, 4});
    long double e = std::exp(static_cast<long double>(M_PI)), acc = 0, ek = 1;
    for (int k = 0; k <= 6; ++k, ek *= e) acc += p.coeffs[k] * ek;
    CHECK(rel_close(p.value, static_cast<double>(acc), 1e-14));
    CHECK(p.value > 4 * std::exp(6 * M_PI));
    CHECK(p.digits.size() >= 40);
    CHECK(std::stold(p.digits) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-14));
}

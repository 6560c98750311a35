#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holocyc/flow.hpp"

#include <cmath>
#include <random>

using namespace holocyc;

namespace {

const Complex I{0.0, 1.0};

PiecewiseSystem system52()
{
    return parse_system(R"({"upper": [["-14333/2000", "1159/1000"], ["3/8", "1"]],
                            "lower": [["-51/50", "1/250"], ["-1/5", "1"]]})");
}

PiecewiseSystem linear(double lp, double lm)
{
    return {HoloPoly(std::vector<Complex>{0.0, I + lp}), HoloPoly(std::vector<Complex>{0.0, I + lm})};
}

// Oracle for the lower solution of the example: x(t), y(t) as printed for
// dz/dt = (i - 1/5) z - 51/50 + i/250.
Complex lower_solution(double x, double t)
{
    double e = std::exp(-t / 5);
    return {-0.2 + ((x + 0.2) * std::cos(t) - 0.98 * std::sin(t)) * e,
            -0.98 + ((x + 0.2) * std::sin(t) + 0.98 * std::cos(t)) * e};
}

} // namespace

TEST_CASE("linear flow")
{
    CHECK(std::abs(linear_flow(I, 0.0, 1.0, M_PI) - Complex(-1, 0)) < 1e-15);
    CHECK(linear_flow({0.3, 2.0}, {1.0, -1.0}, {0.4, 0.1}, 0.0) == Complex(0.4, 0.1));
    for (double x : {-1.0, 0.3, 2.0})
        for (double t : {0.5, 1.7, 4.0})
            CHECK(std::abs(linear_flow(I - 0.2, {-1.02, 0.004}, x, t) - lower_solution(x, t)) < 1e-13);
    CHECK_THROWS_AS(linear_flow(0.0, 1.0, 0.0, 1.0), FlowError);
}

TEST_CASE("section crossings of linear fields")
{
    auto c = integrate_to_section(HoloPoly(std::vector<Complex>{0.0, I}), 1.0, Side::upper);
    CHECK(c.end == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(c.flight_time == doctest::Approx(M_PI).epsilon(1e-13));

    for (double lam : {-0.4, 0.1, 0.7}) {
        HoloPoly p(std::vector<Complex>{0.0, I + lam});
        for (double s : {0.01, 0.5, 3.0, 10.0}) {
            auto r = integrate_to_section(p, s, Side::upper);
            CHECK(std::abs(r.end / (-std::exp(lam * M_PI) * s) - 1) < 1e-10);
            CHECK(half_return(linear(lam, 0.0), Side::upper, s) == doctest::Approx(std::exp(lam * M_PI) * s).epsilon(1e-10));
        }
    }
}

TEST_CASE("half-return maps of the center")
{
    PiecewiseSystem s = linear(0.0, 0.0);
    CHECK(half_return(s, Side::upper, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half_return(s, Side::lower, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    for (double x : {0.1, 1.0, 4.0}) {
        CHECK(std::abs(displacement(s, x)) < 1e-12);
        CHECK(std::abs(displacement1(s, x)) < 1e-12);
    }
}

TEST_CASE("orbits of the example system follow the flight-time solution")
{
    PiecewiseSystem s = system52();
    // the outer cycle: upper flight v, lower flight u
    const double x = 5.190834162453859;
    auto up = integrate_to_section(s.upper, x, Side::upper);
    auto lo = integrate_to_section(s.lower, up.end, Side::lower);
    CHECK(up.flight_time == doctest::Approx(1.599505).epsilon(1e-6));
    CHECK(lo.flight_time == doctest::Approx(3.411939).epsilon(1e-6));
    CHECK(std::abs(lo.end - x) < 1e-9);
    CHECK(std::abs(lower_solution(up.end, lo.flight_time) - Complex(lo.end, 0.0)) < 1e-10);
    CHECK(std::abs(displacement(s, x)) < 1e-9);
}

TEST_CASE("polynomial sides use the integrator")
{
    HoloPoly p(std::vector<Complex>{0.0, I + 0.1, {0.3, -0.2}, {0.1, 0.1}});
    auto f = integrate_to_section(p, 0.3, Side::upper);
    CHECK(f.end < 0);
    CHECK(f.flight_time > 0);
    auto b = integrate_to_section(p, f.end, Side::upper, Orientation::backward);
    CHECK(std::abs(b.end - 0.3) < 1e-10);
    CHECK(std::abs(b.flight_time - f.flight_time) < 1e-9);

    // the integrator agrees with the closed form on a linear field written with a zero cubic term
    HoloPoly lin(std::vector<Complex>{0.0, I + 0.2});
    auto exact = integrate_to_section(lin, 0.7, Side::upper);
    HoloPoly padded(std::vector<Complex>{0.0, I + 0.2, 1e-300});
    auto num = integrate_to_section(padded, 0.7, Side::upper);
    CHECK(std::abs(exact.end - num.end) < 1e-10);
}

TEST_CASE("crossing failures are reported")
{
    // an attracting focus at i captures the upper orbit
    HoloPoly sink(std::vector<Complex>{-(I - 0.5) * I, I - 0.5});
    CHECK_THROWS_AS(integrate_to_section(sink, 0.1, Side::upper), FlowError);
    // the field points into the lower half plane
    CHECK_THROWS_AS(integrate_to_section(HoloPoly(std::vector<Complex>{0.0, I}), -1.0, Side::upper), FlowError);
    // tangency at the origin
    CHECK_THROWS_AS(integrate_to_section(HoloPoly(std::vector<Complex>{0.0, I}), 0.0, Side::upper), FlowError);
}

TEST_CASE("displacement slope near a focus equals V_1")
{
    for (auto [lp, lm] : {std::pair{0.1, 0.05}, std::pair{-0.2, 0.1}, std::pair{0.3, -0.3}}) {
        PiecewiseSystem s = linear(lp, lm);
        double x = 1e-3;
        CHECK(displacement(s, x) / x == doctest::Approx(std::expm1((lp + lm) * M_PI)).epsilon(1e-9));
    }
}

TEST_CASE("the two displacements have opposite signs and the same zeros")
{
    PiecewiseSystem s = system52();
    for (double x : {0.8, 1.2, 2.0, 4.0, 7.0}) {
        double d2 = displacement(s, x), d1 = displacement1(s, x);
        CHECK(d1 * d2 < 0);
    }
    for (double x : {0.32210511337814063, 1.4975203018050043, 5.190834162453859})
        CHECK(std::abs(displacement1(s, x)) < 1e-8);
}

TEST_CASE("cycle scan")
{
    SUBCASE("three nested cycles of the example")
    {
        auto scan = find_cycles(system52(), 0.1, 12.0, 2000);
        REQUIRE(scan.cycles.size() == 3);
        CHECK(scan.cycles[0].section_point == doctest::Approx(0.322105).epsilon(1e-5));
        CHECK(scan.cycles[1].section_point == doctest::Approx(1.497520).epsilon(1e-5));
        CHECK(scan.cycles[2].section_point == doctest::Approx(5.190834).epsilon(1e-5));
        for (size_t i = 0; i < 3; ++i) {
            CHECK(scan.cycles[i].residual < 1e-9);
            if (i > 0) CHECK(scan.cycles[i].stability != scan.cycles[i - 1].stability);
        }
    }
    SUBCASE("the global center has none")
    {
        CHECK(find_cycles(linear(0.0, 0.0), 0.1, 5.0, 200).cycles.empty());
    }
    SUBCASE("a focus has none")
    {
        CHECK(find_cycles(linear(0.1, 0.0), 0.1, 5.0, 200).cycles.empty());
    }
}

TEST_CASE("trajectory samples stay on their side")
{
    auto pts = trajectory(system52(), 1.4975203018050043, 50);
    REQUIRE(pts.size() > 50);
    for (const auto& p : pts) {
        if (p.side == Side::upper) CHECK(p.y >= -1e-9);
        else CHECK(p.y <= 1e-9);
    }
    CHECK(std::abs(pts.back().x - pts.front().x) < 1e-8);
}

TEST_CASE("series oracle for the upper half-return")
{
    SUBCASE("linear field")
    {
        for (double lam : {0.0, 0.2, 1.0}) {
            auto m = return_series_oracle(HoloPoly(std::vector<Complex>{0.0, I + lam}), 5);
            CHECK(m.coeffs[1] == doctest::Approx(std::expm1(lam * M_PI)).epsilon(1e-9));
            for (int k = 2; k <= 5; ++k) CHECK(std::abs(m.coeffs[k]) < 1e-8);
        }
    }
    SUBCASE("quadratic term at lambda = 0")
    {
        const Complex A(0.3, 0.7);
        auto m = return_series_oracle(HoloPoly(std::vector<Complex>{0.0, I, A}), 5);
        CHECK(m.coeffs[2] == doctest::Approx(-2 * A.imag()).epsilon(1e-8));
        auto unit = return_series_oracle(HoloPoly(std::vector<Complex>{0.0, I, I}), 3);
        CHECK(unit.coeffs[2] == doctest::Approx(-2.0).epsilon(1e-8));
    }
    SUBCASE("cubic term at lambda = 0")
    {
        auto m = return_series_oracle(HoloPoly(std::vector<Complex>{0.0, I, 0.0, {0.4, -0.6}}), 5);
        CHECK(std::abs(m.coeffs[3]) < 1e-8);
    }
    SUBCASE("the series matches the half-return map at small radius")
    {
        HoloPoly p(std::vector<Complex>{0.0, I + 0.1, {0.2, 0.3}, {-0.1, 0.2}});
        auto m = return_series_oracle(p, 6);
        PiecewiseSystem s{p, p};
        const double x = 0.01;
        double series = x;
        for (int k = 1; k <= 6; ++k) series += m.coeffs[k] * std::pow(x, k);
        CHECK(half_return(s, Side::upper, x) == doctest::Approx(series).epsilon(1e-11));
    }
    CHECK_THROWS(return_series_oracle(HoloPoly(std::vector<Complex>{0.0, 1.0}), 3));
    CHECK_THROWS(return_series_oracle(HoloPoly(std::vector<Complex>{0.0, I}), 9));
}

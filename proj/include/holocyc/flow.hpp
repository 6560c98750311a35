#pragma once

#include "holocyc/core.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace holocyc {

enum class Orientation { forward, backward };

struct FlowOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double event_tol = 1e-12;
    double max_time = 200.0;
    double escape_radius = 1e8;
};

class FlowError : public std::runtime_error {
public:
    enum Kind { divergence, tangency, wrong_side, unsupported };
    FlowError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

struct SectionCrossing {
    double start;
    double end;
    double flight_time;
    Side side;
};

struct SeriesMap {
    std::vector<double> coeffs;   // coeffs[k] multiplies s^k, coeffs[0] unused
    double base_point = 0.0;
};

enum class Stability { attracting, repelling, nonhyperbolic };

struct CycleRecord {
    double section_point;
    double period;
    double floquet_slope;
    Stability stability;
    double residual;   // |Delta_2| at section_point
};

struct CycleScan {
    std::vector<CycleRecord> cycles;
    std::vector<std::string> failures;
};

struct TrajectoryPoint {
    double t, x, y;
    Side side;
};

// Solution of dz/dt = a z + b.
Complex linear_flow(Complex a, Complex b, Complex z0, double t);

// Leaves the real axis at x0 into the open half plane `side` and follows the
// flow (or the reversed flow) until it meets Im z = 0 again.
SectionCrossing integrate_to_section(const HoloPoly& p, double x0, Side side,
                                     Orientation o = Orientation::forward,
                                     const FlowOptions& opt = {});

// Half-return maps on positive arguments: the upper map sends x > 0 to the
// modulus of its landing point; the lower map starts at -x.
double half_return(const PiecewiseSystem& s, Side side, double x, const FlowOptions& opt = {});

// Raw first-return map on Sigma: upper flow from x, then lower flow back.
double return_map(const PiecewiseSystem& s, double x, const FlowOptions& opt = {});
double return_time(const PiecewiseSystem& s, double x, const FlowOptions& opt = {});

// Delta_2(x) = P(x) - x.
double displacement(const PiecewiseSystem& s, double x, const FlowOptions& opt = {});
// Delta_1(x) = (f^-)^{-1}(x) - f^+(x), the inverse taken by backward integration.
double displacement1(const PiecewiseSystem& s, double x, const FlowOptions& opt = {});

CycleScan find_cycles(const PiecewiseSystem& s, double x_min, double x_max, int grid,
                      const FlowOptions& opt = {});

// One full turn starting at x on Sigma, sampled for plotting and winding checks.
std::vector<TrajectoryPoint> trajectory(const PiecewiseSystem& s, double x, int samples_per_side,
                                        const FlowOptions& opt = {});

// Taylor coefficients of R(pi, s) - s for the polar equation of dz/dt = p(z),
// obtained from complex initial radii on the circle |s| = radius_scale.  With
// radius_scale = 0 the largest circle among 0.4, 0.2, 0.1, ... whose upper
// harmonics have decayed is used.
SeriesMap return_series_oracle(const HoloPoly& p, int order, double radius_scale = 0.0);

} // namespace holocyc

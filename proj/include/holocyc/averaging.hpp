#pragma once

#include "holocyc/core.hpp"
#include "holocyc/flow.hpp"

#include <utility>
#include <vector>

namespace holocyc {

// h(z) = sum (a_k + i b_k) z^k on each side; the perturbed system is
// dz/dt = i z + eps h^{+-}(z).
struct PerturbationPair {
    std::vector<std::pair<double, double>> upper;
    std::vector<std::pair<double, double>> lower;
};

struct RealPoly {
    std::vector<double> coeffs;   // coeffs[k] multiplies r^k

    RealPoly() = default;
    explicit RealPoly(std::vector<double> c);
    double operator()(double r) const;
    RealPoly derivative() const;
    bool is_zero(double tol = 0.0) const;
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

RealPoly averaged_M1(const PerturbationPair& p);

// Requires averaged_M1(p) == 0 up to `tol` on the coefficients.
RealPoly averaged_M2(const PerturbationPair& p, double tol = 1e-12);

// Sign variations of the nonzero coefficients.
int descartes_bound(const RealPoly& q);

// Positive real zeros, companion eigenvalues then Newton.
std::vector<double> positive_zeros(const RealPoly& q);

// Largest number of simple zeros the chosen averaged function can have.
int max_zeros(int n_plus, int n_minus, int order);

PerturbationPair realize_zeros(const std::vector<double>& targets, int n_plus, int n_minus, int order);

PiecewiseSystem perturbed_system(const PerturbationPair& p, double eps);

struct CyclePrediction {
    double predicted;   // simple zero of M_order
    double observed;    // section point of the matched cycle, NaN if none
    double error;
};

struct PredictionReport {
    std::vector<CyclePrediction> pairs;
    int observed_count = 0;
    bool ambiguous = false;
    std::vector<std::string> notes;
};

PredictionReport predict_cycles(const PerturbationPair& p, int order, double eps, int grid = 400,
                                const FlowOptions& opt = {});

} // namespace holocyc

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bilap {

// Throws ValidationError unless 5 <= n <= 10.
void require_dimension(int n);

double critical_exponent(int n);  // p = (n+4)/(n-4)
double sobolev_exponent(int n);   // q = 2n/(n-4)

double beta_fn(double x, double y);

double c_n(int n);
double S_n(int n);
double c2(int n);
double c3(int n);
// Leading-order value of c4 from int K delta^p lambda^{-1} d(delta)/da = S_n grad K / (q lambda).
double c4_asymptotic(int n);
// Delta^2 |x|^{4-n} = kappa_n * Dirac at the origin.
double kappa_n(int n);

// The same constants evaluated through integrate_radial_rn.
double S_n_quadrature(int n);
double c2_quadrature(int n);
double c3_quadrature(int n);

struct C4Estimate {
    double value = 0.0;
    double spread = 0.0;  // |two Richardson extrapolants differ|
    bool low_confidence = false;
    std::vector<double> lambdas;
    std::vector<double> ratios;
};

struct C4Options {
    std::string k_field = "single-bump";
    double alpha_scale = 1.0;
    double offset = 0.15;  // |a| along the first axis
    std::vector<double> lambdas = {50.0, 100.0, 200.0};
};

// Extrapolates lambda * pairing / (2 J alpha^p J^{n/(n-4)} |grad K|) to
// lambda = infinity from finite-difference pairings of the quadrature energy.
C4Estimate c4_estimate(int n, const C4Options& opt = {});

struct ConstantSet {
    int n = 0;
    double c_n = 0, S_n = 0, c2 = 0, c3 = 0, c4 = 0;
    std::optional<C4Estimate> c4_estimate;
};

ConstantSet constant_set(int n);

}  // namespace bilap

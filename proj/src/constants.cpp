#include "bilap/constants.hpp"

#include <cmath>
#include <string>

#include "bilap/errors.hpp"
#include "bilap/numerics/radial_quadrature.hpp"

namespace bilap {

void require_dimension(int n) {
    if (n < 5 || n > 10)
        throw ValidationError("dimension " + std::to_string(n) + " outside supported range 5..10");
}

double critical_exponent(int n) { return double(n + 4) / double(n - 4); }
double sobolev_exponent(int n) { return 2.0 * n / double(n - 4); }

double beta_fn(double x, double y) {
    return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

double c_n(int n) {
    require_dimension(n);
    double prod = double(n - 4) * (n - 2) * n * (n + 2);
    return std::pow(prod, (n - 4) / 8.0);
}

namespace {
double cq(int n) { return std::pow(c_n(n), sobolev_exponent(n)); }
}  // namespace

double S_n(int n) {
    return cq(n) * unit_sphere_area(n) * 0.5 * beta_fn(0.5 * n, 0.5 * n);
}

double c2(int n) {
    return cq(n) * unit_sphere_area(n) * 0.5 * beta_fn(0.5 * n, 2.0);
}

double c3(int n) {
    return cq(n) / (2.0 * n) * unit_sphere_area(n) * 0.5 * beta_fn(0.5 * n + 1.0, 0.5 * n - 1.0);
}

double c4_asymptotic(int n) { return (n - 4) * S_n(n) / (2.0 * n); }

double kappa_n(int n) {
    require_dimension(n);
    return 2.0 * (n - 4) * (n - 2) * unit_sphere_area(n);
}

double S_n_quadrature(int n) {
    double k = cq(n);
    return integrate_radial_rn([&](double r) { return k * std::pow(1.0 + r * r, -n); }, n);
}

double c2_quadrature(int n) {
    double k = cq(n);
    return integrate_radial_rn([&](double r) { return k * std::pow(1.0 + r * r, -0.5 * (n + 4)); },
                               n);
}

double c3_quadrature(int n) {
    double k = cq(n) / (2.0 * n);
    return integrate_radial_rn([&](double r) { return k * r * r * std::pow(1.0 + r * r, -n); }, n);
}

ConstantSet constant_set(int n) {
    ConstantSet cs;
    cs.n = n;
    cs.c_n = c_n(n);
    cs.S_n = S_n(n);
    cs.c2 = c2(n);
    cs.c3 = c3(n);
    cs.c4 = c4_asymptotic(n);
    return cs;
}

}  // namespace bilap

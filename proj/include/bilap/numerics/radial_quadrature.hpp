#pragma once

#include <functional>

namespace bilap {

// Surface area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n);

// Adaptive Gauss-Legendre on [a, b]: panels are bisected until the 10-point
// and 20-point rules agree to max(rel_tol * |I|, abs_tol). Throws
// QuadratureError when max_depth is reached.
double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                      double rel_tol = 1e-13, double abs_tol = 0.0, int max_depth = 40);

// unit_sphere_area(n) * int_0^inf g(r) r^{n-1} dr, computed as an integral in
// theta after r = tan(theta). Throws QuadratureError if the integrand does not
// decay fast enough at infinity.
double integrate_radial_rn(const std::function<double(double)>& g, int n,
                           double rel_tol = 1e-12);

}  // namespace bilap

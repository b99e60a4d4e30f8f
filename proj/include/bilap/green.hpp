#pragma once

#include "bilap/numerics/ball_quadrature.hpp"

namespace bilap {

// Dirichlet Green function of -Laplace on the unit ball (image charge).
double green_laplacian_ball(const Vec& x, const Vec& y);

// Navier Green function of the bilaplacian on the unit ball, normalized so
// that G(x,y) = |x-y|^{4-n} - H(x,y), computed as kappa_n times the iterated
// kernel int G_L(x,z) G_L(z,y) dz by quadrature.
double green_navier(const Vec& x, const Vec& y, const QuadratureSpec& spec);

// Regular part H(x,y), from its integral representation
//   H = (nu-1) [ I_{-1} + (1-|x|^2-|y|^2) I_{+1} ],  nu = (n-2)/2,
//   I_c = int_0^1 tau^{nu+c-1} (1 - 2 x.y tau + |x|^2|y|^2 tau^2)^{-nu} dtau.
double regular_part_H(const Vec& x, const Vec& y);
// G(x,y) = |x-y|^{4-n} - H(x,y).
double green_G(const Vec& x, const Vec& y);
// Laplacian of H(x,.) at y: -2(n-4) (1 - 2 x.y + |x|^2|y|^2)^{-(n-2)/2}.
double laplacian_y_H(const Vec& x, const Vec& y);

double robin(const Vec& a);  // H(a,a)
// Exact H(0,0) = 2(n-2)/n from the radial two-stage solve.
double robin_center(int n);

// Gradient of H in its first argument (central differences, step 0.01 d(x)).
Vec grad_H(const Vec& x, const Vec& y);
// Gradient of the diagonal a -> H(a,a) (central differences).
Vec grad_robin(const Vec& a);
// Derivative of a -> H(a,a) along the outward radial direction a/|a|.
double dH_dnu(const Vec& a);

// H(x,y) through green_navier: |x-y|^{4-n} - G.
double regular_part_H_quadrature(const Vec& x, const Vec& y, const QuadratureSpec& spec);
// H(a,a) from quadrature values H(a, a + h e) extrapolated to h = 0.
double robin_quadrature(const Vec& a, const QuadratureSpec& spec);

struct RateFit {
    double exponent = 0.0;
    double r_squared = 0.0;
    double residual = 0.0;  // max |log fit error|
    bool all_positive = false;
    bool poor_fit = false;  // r_squared < 0.99
};

// Fit dH_dnu(a) ~ C d(a)^exponent along a/|a| over the distance ladder.
RateFit dH_dnu_rate_check(const Vec& boundary_direction, const std::vector<double>& distances);

}  // namespace bilap

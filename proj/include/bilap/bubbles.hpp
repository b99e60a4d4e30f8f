#pragma once

#include <Eigen/Dense>

#include "bilap/numerics/ball_quadrature.hpp"

namespace bilap {

struct Bubble {
    Vec a;
    double lambda = 1.0;
};

double boundary_distance(const Vec& a);  // 1 - |a|

// delta_{(a,lambda)}(x) = c_n (lambda / (1 + lambda^2 |x-a|^2))^{(n-4)/2}
double delta_eval(const Bubble& b, const Vec& x);
double log_delta(const Bubble& b, const Vec& x);

struct DeltaParamGrad {
    double lambda_dlambda;  // lambda * d(delta)/d(lambda)
    Vec a_grad;             // lambda^{-1} * d(delta)/da
};
DeltaParamGrad delta_params_grad(const Bubble& b, const Vec& x);

double eps(const Bubble& bi, const Bubble& bj);

struct EpsDerivs {
    double lambda_dlambda;  // lambda_i * d(eps_ij)/d(lambda_i)
    Vec a_grad;             // lambda_i^{-1} * d(eps_ij)/d(a_i)
};
EpsDerivs eps_derivs(const Bubble& bi, const Bubble& bj);

struct InteractionReport {
    double quadrature = 0.0;  // int_{R^n} delta_i^p delta_j
    double leading = 0.0;     // c2 * eps_ij
    double residual = 0.0;    // quadrature - leading
    double eps = 0.0;
    double error_estimate = 0.0;
};
InteractionReport interaction_integral_check(const Bubble& bi, const Bubble& bj,
                                             const QuadratureSpec& spec);

}  // namespace bilap

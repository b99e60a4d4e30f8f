#include "bilap/bubbles.hpp"

#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"

namespace bilap {

double boundary_distance(const Vec& a) { return 1.0 - a.norm(); }

double log_delta(const Bubble& b, const Vec& x) {
    const int n = static_cast<int>(x.size());
    double r2 = (x - b.a).squaredNorm();
    double lam = b.lambda;
    return std::log(c_n(n)) +
           0.5 * (n - 4) * (std::log(lam) - std::log1p(lam * lam * r2));
}

double delta_eval(const Bubble& b, const Vec& x) { return std::exp(log_delta(b, x)); }

DeltaParamGrad delta_params_grad(const Bubble& b, const Vec& x) {
    const int n = static_cast<int>(x.size());
    const double m = 0.5 * (n - 4);
    Vec d = x - b.a;
    double t = b.lambda * b.lambda * d.squaredNorm();
    double del = delta_eval(b, x);
    DeltaParamGrad g;
    g.lambda_dlambda = m * del * (1.0 - t) / (1.0 + t);
    g.a_grad = (2.0 * m * del * b.lambda / (1.0 + t)) * d;
    return g;
}

namespace {
double eps_base(const Bubble& bi, const Bubble& bj) {
    double li = bi.lambda, lj = bj.lambda;
    return li / lj + lj / li + li * lj * (bi.a - bj.a).squaredNorm();
}
}  // namespace

double eps(const Bubble& bi, const Bubble& bj) {
    const int n = static_cast<int>(bi.a.size());
    return std::pow(eps_base(bi, bj), -0.5 * (n - 4));
}

EpsDerivs eps_derivs(const Bubble& bi, const Bubble& bj) {
    const int n = static_cast<int>(bi.a.size());
    const double m = 0.5 * (n - 4);
    double li = bi.lambda, lj = bj.lambda;
    Vec d = bi.a - bj.a;
    double E = eps_base(bi, bj);
    double e = std::pow(E, -m);
    EpsDerivs out;
    out.lambda_dlambda = -m * e / E * (li / lj - lj / li + li * lj * d.squaredNorm());
    out.a_grad = (-m * e / E * 2.0 * lj) * d;
    return out;
}

InteractionReport interaction_integral_check(const Bubble& bi, const Bubble& bj,
                                             const QuadratureSpec& spec) {
    const int n = static_cast<int>(bi.a.size());
    require_dimension(n);
    if ((bi.a - bj.a).norm() == 0.0 && bi.lambda == bj.lambda)
        throw ValidationError("interaction_integral_check: bubbles coincide");
    const double p = critical_exponent(n);
    BallIntegrand in;
    in.n = n;
    in.domain = Domain::Space;
    in.centers = {{bi.a, bi.lambda}, {bj.a, bj.lambda}};
    // The integrand decays like rho^{-(n+4) - (n-4)}; after the rho^n Jacobian
    // that leaves rho^{-n}.
    in.decay_power = n;
    in.f = [&](const Vec& y, double* out) {
        out[0] = std::exp(p * log_delta(bi, y) + log_delta(bj, y));
    };
    QuadResult q = integrate_ball(in, spec);
    // Rays stop where rho^n * integrand has decayed by e^{-36} from its
    // boundary value; the dropped tail is bounded by that fraction of the
    // result and is folded into the error estimate.
    InteractionReport r;
    r.quadrature = q.value[0];
    r.error_estimate = q.error[0] + std::exp(-36.0) * std::fabs(q.value[0]);
    r.eps = eps(bi, bj);
    r.leading = c2(n) * r.eps;
    r.residual = r.quadrature - r.leading;
    return r;
}

}  // namespace bilap

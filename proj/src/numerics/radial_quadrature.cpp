#include "bilap/numerics/radial_quadrature.hpp"

#include <cmath>
#include <numbers>

#include "bilap/errors.hpp"
#include "bilap/numerics/gauss_legendre.hpp"
#include "bilap/numerics/summation.hpp"

namespace bilap {

double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

struct Panel {
    double a, b, coarse, fine;
};

Panel make_panel(const std::function<double(double)>& f, double a, double b) {
    return {a, b, gauss_panel(f, a, b, 10), gauss_panel(f, a, b, 20)};
}

void refine(const std::function<double(double)>& f, const Panel& p, double tol,
            int depth, int max_depth, CompensatedSum& acc, double& err) {
    double e = std::fabs(p.fine - p.coarse);
    if (e <= tol || depth >= max_depth) {
        acc.add(p.fine);
        err += e;
        return;
    }
    double m = 0.5 * (p.a + p.b);
    refine(f, make_panel(f, p.a, m), 0.5 * tol, depth + 1, max_depth, acc, err);
    refine(f, make_panel(f, m, p.b), 0.5 * tol, depth + 1, max_depth, acc, err);
}

}  // namespace

double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                      double rel_tol, double abs_tol, int max_depth) {
    Panel root = make_panel(f, a, b);
    double tol = std::max(rel_tol * std::fabs(root.fine), abs_tol);
    if (tol == 0.0) tol = 1e-300;
    CompensatedSum acc;
    double err = 0.0;
    refine(f, root, tol, 0, max_depth, acc, err);
    double value = acc.value();
    double target = std::max(rel_tol * std::fabs(value), abs_tol);
    if (!std::isfinite(value) || err > 10.0 * std::max(target, 1e-300))
        throw QuadratureError("adaptive_gauss: tolerance not reached", value, err);
    return value;
}

double integrate_radial_rn(const std::function<double(double)>& g, int n, double rel_tol) {
    // Integrability at infinity: r^n g(r) must tend to zero.
    double t1 = std::fabs(g(1e4)) * std::pow(1e4, n);
    double t2 = std::fabs(g(1e8)) * std::pow(1e8, n);
    if (!std::isfinite(t2) || (t2 > 1e-12 && t2 > 0.1 * t1))
        throw QuadratureError("integrate_radial_rn: integrand does not decay", NAN, INFINITY);
    auto h = [&](double th) {
        if (th <= 0.0) return 0.0;
        double c = std::cos(th);
        if (c <= 0.0) return 0.0;
        double r = std::tan(th);
        double v = g(r) * std::pow(r, n - 1) / (c * c);
        return std::isfinite(v) ? v : 0.0;
    };
    // Split at pi/4 (r = 1) so both halves see comparable structure.
    double lo = adaptive_gauss(h, 0.0, std::numbers::pi / 4, rel_tol);
    double hi = adaptive_gauss(h, std::numbers::pi / 4, std::numbers::pi / 2, rel_tol);
    return unit_sphere_area(n) * (lo + hi);
}

}  // namespace bilap

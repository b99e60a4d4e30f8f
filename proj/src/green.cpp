#include "bilap/green.hpp"

#include <cmath>
#include <complex>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/numerics/gauss_legendre.hpp"
#include "bilap/numerics/radial_quadrature.hpp"

namespace bilap {

namespace {

int dim_of(const Vec& x) { return static_cast<int>(x.size()); }

// Q^{-(n-2)/2} for Q > 0.
double pow_neg_nu(double Q, int n) {
    int k = (n - 2) / 2;
    double inv = 1.0 / Q, r = 1.0;
    for (int i = 0; i < k; ++i) r *= inv;
    if (n % 2 == 1) r /= std::sqrt(Q);
    return r;
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// Returns I_{-1} and I_{+1} for the product of norms rho and the squared
// distance of the unit vectors, using tau = sigma^2.
void tau_integrals(int n, double rho, double unit_gap2, double& im1, double& ip1) {
    const double nu = 0.5 * (n - 2);
    if (rho < 1e-300) {
        im1 = 1.0 / (nu - 1.0);
        ip1 = 1.0 / (nu + 1.0);
        return;
    }
    // Root of Q in the sigma plane: sigma0 = e^{i theta/2} / sqrt(rho).
    double theta = 2.0 * std::asin(std::min(1.0, 0.5 * std::sqrt(unit_gap2)));
    std::complex<double> s0 = std::polar(1.0 / std::sqrt(rho), 0.5 * theta);
    double D = std::abs(s0 - 1.0);

    std::vector<double> brk;  // descending from 1 to 0
    int nodes = 24;
    brk.push_back(1.0);
    if (D < 0.5) {
        nodes = 16;
        double w = D;
        while (1.0 - w > 0.0) {
            brk.push_back(1.0 - w);
            w *= 2.0;
        }
    }
    brk.push_back(0.0);

    const GaussRule& g = gauss_legendre(nodes);
    double sm = 0.0, sp = 0.0;
    for (size_t p = 0; p + 1 < brk.size(); ++p) {
        double hi = brk[p], lo = brk[p + 1];
        double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        double pm = 0.0, pp = 0.0;
        for (int i = 0; i < nodes; ++i) {
            double s = mid + half * g.nodes[i];
            double tau = s * s;
            double lin = 1.0 - rho * tau;
            double Q = lin * lin + tau * rho * unit_gap2;
            double base = 2.0 * g.weights[i] * pow_neg_nu(Q, n) * ipow(s, n - 5);
            pm += base;
            pp += base * tau * tau;
        }
        sm += half * pm;
        sp += half * pp;
    }
    im1 = sm;
    ip1 = sp;
}

}  // namespace

double green_laplacian_ball(const Vec& x, const Vec& y) {
    const int n = dim_of(x);
    double r = (x - y).norm();
    if (r == 0.0) throw ValidationError("green_laplacian_ball: coincident points");
    double img = 1.0 - 2.0 * x.dot(y) + x.squaredNorm() * y.squaredNorm();
    double kn = 1.0 / ((n - 2) * unit_sphere_area(n));
    return kn * (std::pow(r, 2.0 - n) - std::pow(std::max(img, 0.0), 0.5 * (2.0 - n)));
}

double regular_part_H(const Vec& x, const Vec& y) {
    const int n = dim_of(x);
    require_dimension(n);
    double rx = x.norm(), ry = y.norm();
    double rho = rx * ry;
    double gap2 = 0.0;
    if (rho > 0.0) gap2 = (x / rx - y / ry).squaredNorm();
    double im1, ip1;
    tau_integrals(n, rho, gap2, im1, ip1);
    double nu = 0.5 * (n - 2);
    return (nu - 1.0) * (im1 + (1.0 - rx * rx - ry * ry) * ip1);
}

double green_G(const Vec& x, const Vec& y) {
    const int n = dim_of(x);
    double r = (x - y).norm();
    if (r == 0.0) throw ValidationError("green_G: coincident points");
    return std::pow(r, 4.0 - n) - regular_part_H(x, y);
}

double laplacian_y_H(const Vec& x, const Vec& y) {
    const int n = dim_of(x);
    double rx = x.norm(), ry = y.norm();
    double img;
    if (rx * ry > 0.0) {
        double lin = 1.0 - rx * ry;
        img = lin * lin + rx * ry * (x / rx - y / ry).squaredNorm();
    } else {
        img = 1.0;
    }
    return -2.0 * (n - 4) * pow_neg_nu(img, n);
}

double robin(const Vec& a) { return regular_part_H(a, a); }

double robin_center(int n) {
    require_dimension(n);
    return 2.0 * (n - 2) / double(n);
}

namespace {

template <class F>
Vec central_gradient(F&& f, const Vec& x, double h) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec e = Vec::Zero(x.size());
        e[i] = h;
        g[i] = (-f(x + 2.0 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2.0 * e)) / (12.0 * h);
    }
    return g;
}

}  // namespace

Vec grad_H(const Vec& x, const Vec& y) {
    double h = 0.01 * (1.0 - x.norm());
    return central_gradient([&](const Vec& z) { return regular_part_H(z, y); }, x, h);
}

Vec grad_robin(const Vec& a) {
    double h = 0.01 * (1.0 - a.norm());
    return central_gradient([](const Vec& z) { return robin(z); }, a, h);
}

double dH_dnu(const Vec& a) {
    double r = a.norm();
    if (r == 0.0) return 0.0;
    return grad_robin(a).dot(a / r);
}

double green_navier(const Vec& x, const Vec& y, const QuadratureSpec& spec) {
    const int n = dim_of(x);
    require_dimension(n);
    double sep = (x - y).norm();
    if (sep < 1e-6) throw ValidationError("green_navier: points closer than resolution 1e-6");
    BallIntegrand in;
    in.n = n;
    in.centers = {{x, 1.0 / sep}, {y, 1.0 / sep}};
    in.center_power = 2.0;
    in.f = [&](const Vec& z, double* out) {
        out[0] = green_laplacian_ball(x, z) * green_laplacian_ball(z, y);
    };
    return kappa_n(n) * integrate_ball(in, spec).value[0];
}

double regular_part_H_quadrature(const Vec& x, const Vec& y, const QuadratureSpec& spec) {
    const int n = dim_of(x);
    return std::pow((x - y).norm(), 4.0 - n) - green_navier(x, y, spec);
}

double robin_quadrature(const Vec& a, const QuadratureSpec& spec) {
    const int n = dim_of(a);
    double d = 1.0 - a.norm();
    if (d < 0.02) throw ValidationError("robin_quadrature: too close to the boundary (d < 0.02)");
    // Offset direction orthogonal to a when possible.
    Vec e = Vec::Zero(n);
    e[n - 1] = 1.0;
    if (a.norm() > 0) {
        e -= e.dot(a) / a.squaredNorm() * a;
        if (e.norm() < 1e-8) {
            e = Vec::Zero(n);
            e[0] = 1.0;
            e -= e.dot(a) / a.squaredNorm() * a;
        }
        e /= e.norm();
    }
    auto sym = [&](double h) {
        return 0.5 * (regular_part_H_quadrature(a, a + h * e, spec) +
                      regular_part_H_quadrature(a, a - h * e, spec));
    };
    double h = 0.05 * d;
    double f1 = sym(h), f2 = sym(2.0 * h);
    return (4.0 * f1 - f2) / 3.0;
}

RateFit dH_dnu_rate_check(const Vec& boundary_direction, const std::vector<double>& distances) {
    if (distances.size() < 2) throw ValidationError("dH_dnu_rate_check: need at least two distances");
    Vec nu = boundary_direction / boundary_direction.norm();
    std::vector<double> lx, ly;
    RateFit fit;
    fit.all_positive = true;
    for (double d : distances) {
        if (!(d > 0 && d < 1)) throw ValidationError("dH_dnu_rate_check: distance outside (0,1)");
        double v = dH_dnu((1.0 - d) * nu);
        if (!(v > 0)) {
            fit.all_positive = false;
            v = std::fabs(v);
        }
        lx.push_back(std::log(d));
        ly.push_back(std::log(v));
    }
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double icpt = (sy - slope * sx) / m;
    double ss_tot = 0, ss_res = 0, ybar = sy / m;
    for (size_t i = 0; i < lx.size(); ++i) {
        double r = ly[i] - (icpt + slope * lx[i]);
        ss_res += r * r;
        ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
        fit.residual = std::max(fit.residual, std::fabs(r));
    }
    fit.exponent = slope;
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.poor_fit = fit.r_squared < 0.99;
    return fit;
}

}  // namespace bilap

#pragma once

// Reference values computed without the library's quadrature or closed forms.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

// int_0^inf r^a (1 + r^2)^{-b} dr with r = tan(t), composite Simpson on [0, pi/2].
inline double radial_moment(double a, double b, int panels = 20000) {
    auto f = [&](double t) {
        double s = std::sin(t), c = std::cos(t);
        double e = 2.0 * b - a - 2.0;
        if (c == 0.0) return e > 0 ? 0.0 : (e == 0 ? std::pow(s, a) : HUGE_VAL);
        return std::pow(s, a) * std::pow(c, e);
    };
    const double h = 0.5 * std::numbers::pi / panels;
    double sum = f(0.0) + f(0.5 * std::numbers::pi);
    for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return sum * h / 3.0;
}

// Radial functions sum_j w_j (1 + s)^{-j} with s = |y|^2, and the exact
// action of the Laplacian on them:
//   Laplace (1+s)^{-j} = (4j(j+1) - 2nj)(1+s)^{-j-1} - 4j(j+1)(1+s)^{-j-2}.
struct RadialSeries {
    std::vector<double> w;  // w[j] multiplies (1+s)^{-j}, j may be fractional via offset
    double offset = 0.0;    // exponent of term k is offset + k
    double operator()(double s) const {
        double v = 0.0;
        for (size_t k = 0; k < w.size(); ++k) v += w[k] * std::pow(1.0 + s, -(offset + k));
        return v;
    }
};

inline RadialSeries laplacian(const RadialSeries& f, int n) {
    RadialSeries g{std::vector<double>(f.w.size() + 2, 0.0), f.offset};
    for (size_t k = 0; k < f.w.size(); ++k) {
        double j = f.offset + k;
        g.w[k + 1] += f.w[k] * (4.0 * j * (j + 1.0) - 2.0 * n * j);
        g.w[k + 2] += f.w[k] * (-4.0 * j * (j + 1.0));
    }
    return g;
}

// c_n from a positive solution c (1+s)^{-(n-4)/2} of Delta^2 u = u^{(n+4)/(n-4)}:
// the bilaplacian is A (1+s)^{-(n+4)/2} plus terms that must cancel; solve
// c A = c^{(n+4)/(n-4)} for c.
inline double bubble_constant(int n) {
    RadialSeries u{{1.0}, 0.5 * (n - 4)};
    RadialSeries b = laplacian(laplacian(u, n), n);
    double A = b.w[4];  // exponent (n-4)/2 + 4 = (n+4)/2
    return std::pow(A, (n - 4) / 8.0);
}

// Robin function at the center of the unit ball with G = |x-y|^{4-n} - H:
// H(0, y) = h0 + h1 |y|^2 with G(0, .) = Laplace G(0, .) = 0 on the sphere.
inline double robin_center(int n) {
    double h1 = -(n - 4.0) / n;
    return 1.0 - h1;
}
inline double H_center(int n, double r) { return robin_center(n) - (n - 4.0) / n * r * r; }

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace oracle

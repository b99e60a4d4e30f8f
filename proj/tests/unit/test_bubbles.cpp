#include <doctest.h>

#include <cmath>
#include <random>

#include "bilap/bubbles.hpp"
#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "../oracles.hpp"

using namespace bilap;

namespace {

Vec random_point(std::mt19937_64& rng, int n, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec x(n);
    do {
        for (int i = 0; i < n; ++i) x[i] = u(rng);
    } while (x.norm() >= 1.0);
    return radius * x;
}

}  // namespace

TEST_CASE("bubble solves the critical equation (symbolic bilaplacian)") {
    std::mt19937_64 rng(7);
    for (int n = 5; n <= 10; ++n) {
        const double m = 0.5 * (n - 4), p = critical_exponent(n);
        oracle::RadialSeries u{{1.0}, m};
        auto bi = oracle::laplacian(oracle::laplacian(u, n), n);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            Bubble b{random_point(rng, n, 0.8), std::exp(std::uniform_real_distribution<double>(0.0, 5.0)(rng))};
            Vec x = random_point(rng, n, 1.0);
            double s = b.lambda * b.lambda * (x - b.a).squaredNorm();
            double lhs = c_n(n) * std::pow(b.lambda, m + 4.0) * bi(s);
            double rhs = std::pow(delta_eval(b, x), p);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("delta closed form and log form agree") {
    const int n = 7;
    Bubble b{Vec::Zero(n), 30.0};
    b.a[1] = 0.2;
    Vec x = Vec::Zero(n);
    x[0] = 0.1;
    double r2 = (x - b.a).squaredNorm();
    double ref = c_n(n) * std::pow(b.lambda / (1.0 + b.lambda * b.lambda * r2), 1.5);
    CHECK(delta_eval(b, x) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(std::exp(log_delta(b, x)) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(boundary_distance(b.a) == doctest::Approx(0.8));
}

TEST_CASE("parameter derivatives of delta match finite differences") {
    const int n = 7;
    Bubble b{Vec::Zero(n), 12.0};
    b.a[0] = 0.1;
    Vec x = Vec::Zero(n);
    x[0] = 0.15;
    x[2] = 0.05;
    DeltaParamGrad g = delta_params_grad(b, x);
    const double h = 1e-5;
    Bubble bp = b, bm = b;
    bp.lambda *= std::exp(h);
    bm.lambda *= std::exp(-h);
    CHECK(g.lambda_dlambda == doctest::Approx((delta_eval(bp, x) - delta_eval(bm, x)) / (2 * h)).epsilon(1e-7));
    for (int i = 0; i < n; ++i) {
        Bubble ap = b, am = b;
        ap.a[i] += h;
        am.a[i] -= h;
        double fd = (delta_eval(ap, x) - delta_eval(am, x)) / (2 * h) / b.lambda;
        CHECK(g.a_grad[i] == doctest::Approx(fd).epsilon(1e-6).scale(1e-6 * delta_eval(b, x)));
    }
}

TEST_CASE("eps is symmetric, matches its definition and its derivatives") {
    const int n = 7;
    Bubble bi{Vec::Zero(n), 20.0}, bj{Vec::Zero(n), 35.0};
    bi.a[0] = 0.1;
    bj.a[1] = -0.2;
    double d2 = (bi.a - bj.a).squaredNorm();
    double ref = std::pow(20.0 / 35.0 + 35.0 / 20.0 + 20.0 * 35.0 * d2, -1.5);
    CHECK(eps(bi, bj) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(eps(bj, bi) == doctest::Approx(ref).epsilon(1e-14));
    EpsDerivs e = eps_derivs(bi, bj);
    const double h = 1e-6;
    Bubble p = bi, m = bi;
    p.lambda *= std::exp(h);
    m.lambda *= std::exp(-h);
    CHECK(e.lambda_dlambda == doctest::Approx((eps(p, bj) - eps(m, bj)) / (2 * h)).epsilon(1e-6));
    for (int k = 0; k < 2; ++k) {
        Bubble ap = bi, am = bi;
        ap.a[k] += h;
        am.a[k] -= h;
        CHECK(e.a_grad[k] == doctest::Approx((eps(ap, bj) - eps(am, bj)) / (2 * h) / bi.lambda).epsilon(1e-6));
    }
}

TEST_CASE("interaction integral depends on eps only") {
    // Pairs of bubbles modulo conformal maps are classified by eps, so a
    // concentric pair with the same eps has the same interaction.
    const int n = 7;
    QuadratureSpec q{12, 20, 0.5, 1e-12, 0.0, false, 0, 0};
    Bubble bi{Vec::Zero(n), 40.0}, bj{Vec::Zero(n), 60.0};
    bj.a[0] = 0.3;
    InteractionReport r = interaction_integral_check(bi, bj, q);
    double s = std::pow(r.eps, -2.0 / (n - 4));
    double mu = 0.5 * (s + std::sqrt(s * s - 4.0));
    InteractionReport c = interaction_integral_check(Bubble{Vec::Zero(n), 1.0}, Bubble{Vec::Zero(n), mu}, q);
    CHECK(c.eps == doctest::Approx(r.eps).epsilon(1e-12));
    CHECK(c.quadrature == doctest::Approx(r.quadrature).epsilon(1e-6));
    CHECK(r.leading == doctest::Approx(c2(n) * r.eps).epsilon(1e-14));
    CHECK(std::abs(r.residual) / r.leading < 5e-4);
}

TEST_CASE("interaction check rejects coincident bubbles") {
    const int n = 6;
    Bubble b{Vec::Zero(n), 5.0};
    CHECK_THROWS_AS(interaction_integral_check(b, b, QuadratureSpec{}), ValidationError);
}

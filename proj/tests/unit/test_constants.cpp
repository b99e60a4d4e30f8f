#include <doctest.h>

#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "../oracles.hpp"

using namespace bilap;

TEST_CASE("dimension gate") {
    CHECK_THROWS_AS(require_dimension(4), ValidationError);
    CHECK_THROWS_AS(require_dimension(11), ValidationError);
    CHECK_NOTHROW(require_dimension(5));
    CHECK_THROWS_AS(constant_set(3), ValidationError);
}

TEST_CASE("exponents") {
    CHECK(critical_exponent(6) == doctest::Approx(5.0));
    CHECK(sobolev_exponent(8) == doctest::Approx(4.0));
    for (int n = 5; n <= 10; ++n) CHECK(critical_exponent(n) + 1.0 == doctest::Approx(sobolev_exponent(n)));
}

TEST_CASE("bilaplacian of the radial profile reduces to a single power") {
    for (int n = 5; n <= 10; ++n) {
        oracle::RadialSeries u{{1.0}, 0.5 * (n - 4)};
        auto b = oracle::laplacian(oracle::laplacian(u, n), n);
        for (int k = 0; k < 4; ++k) CHECK(std::abs(b.w[k]) < 1e-9 * std::abs(b.w[4]));
        CHECK(c_n(n) == doctest::Approx(oracle::bubble_constant(n)).epsilon(1e-13));
    }
}

TEST_CASE("S_n, c2, c3 against independent radial moments") {
    for (int n = 5; n <= 10; ++n) {
        double cq = std::pow(oracle::bubble_constant(n), 2.0 * n / (n - 4));
        double w = oracle::sphere_area(n);
        double S = cq * w * oracle::radial_moment(n - 1, n);
        double C2 = cq * w * oracle::radial_moment(n - 1, 0.5 * (n + 4));
        double C3 = cq / (2.0 * n) * w * oracle::radial_moment(n + 1, n);
        CHECK(S_n(n) == doctest::Approx(S).epsilon(1e-10));
        CHECK(c2(n) == doctest::Approx(C2).epsilon(1e-10));
        CHECK(c3(n) == doctest::Approx(C3).epsilon(1e-10));
        CHECK(S_n_quadrature(n) == doctest::Approx(S).epsilon(1e-10));
        CHECK(c2_quadrature(n) == doctest::Approx(C2).epsilon(1e-10));
        CHECK(c3_quadrature(n) == doctest::Approx(C3).epsilon(1e-10));
    }
}

TEST_CASE("c2 = 20 c3 in dimension six") {
    CHECK(std::abs(c2(6) / c3(6) - 20.0) < 1e-12);
    CHECK(std::abs(c2_quadrature(6) / c3_quadrature(6) - 20.0) < 1e-5);
    CHECK(std::abs(c2(7) / c3(7) - 20.0) > 1.0);
}

TEST_CASE("ordering c2 > S_n > 0") {
    // (1+|y|^2)^{-(n+4)/2} dominates (1+|y|^2)^{-n} pointwise for n > 4.
    for (int n = 5; n <= 10; ++n) {
        CHECK(S_n(n) > 0.0);
        CHECK(c2(n) > S_n(n));
        CHECK(c3(n) > 0.0);
    }
}

TEST_CASE("constant set and the derived c4") {
    ConstantSet s = constant_set(7);
    CHECK(s.n == 7);
    CHECK(s.S_n == doctest::Approx(S_n(7)));
    CHECK(s.c4 == doctest::Approx(3.0 * S_n(7) / 14.0));
    CHECK_FALSE(s.c4_estimate.has_value());
    CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    // kappa_n: Delta^2 |x|^{4-n} = kappa_n delta_0, from the flux of grad Delta |x|^{4-n}
    // = -2(n-4)(2-n) |x|^{1-n} x/|x| through the unit sphere.
    for (int n = 5; n <= 10; ++n)
        CHECK(kappa_n(n) == doctest::Approx(2.0 * (n - 4) * (n - 2) * oracle::sphere_area(n)).epsilon(1e-13));
}

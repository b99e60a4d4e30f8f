#include <doctest.h>

#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/flow.hpp"
#include "bilap/green.hpp"

using namespace bilap;

namespace {

Vec point(int n, double x0, double x1 = 0.0) {
    Vec v = Vec::Zero(n);
    v[0] = x0;
    v[1] = x1;
    return v;
}

bool has_event(const FlowTrace& t, const std::string& kind) {
    for (const FlowEvent& e : t.events)
        if (e.kind == kind) return true;
    return false;
}

}  // namespace

TEST_CASE("balanced weights follow K^{-(n-4)/8}") {
    const int n = 7;
    KField K = catalogued_k("two-bump", n);
    std::vector<Bubble> b = {{point(n, 0.45), 80.0}, {point(n, -0.45), 90.0}};
    std::vector<double> al = balanced_alphas(b, K);
    REQUIRE(al.size() == 2);
    double expect = std::pow(K.value(b[0].a) / K.value(b[1].a), -(n - 4.0) / 8.0);
    CHECK(al[0] / al[1] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(al[0] > 0.0);
}

TEST_CASE("membership in V(p, eps)") {
    const int n = 7;
    FlowConstants c;
    FlowState one{1, {{point(n, 0.3, 0.1), 30.0}}, {}, 0.0};
    CHECK(v_membership(one, c).inside);
    // two bubbles on top of each other interact strongly
    FlowState close{2, {{point(n, 0.3), 30.0}, {point(n, 0.31), 32.0}}, {}, 0.0};
    Membership m = v_membership(close, c);
    CHECK_FALSE(m.inside);
    CHECK_FALSE(m.reason.empty());
}

TEST_CASE("f_lambda initial states") {
    const int n = 7;
    KField K = catalogued_k("constant", n);
    Vec y0 = point(n, 0.4), x = point(n, -0.4);
    FlowState s1 = f_lambda_initial(1.0, y0, x, 50.0, K);
    CHECK(s1.p == 1);
    CHECK(s1.bubbles.size() == 1);
    FlowState s0 = f_lambda_initial(0.0, y0, x, 50.0, K);
    CHECK(s0.p == 1);
    CHECK((s0.bubbles[0].a - x).norm() < 1e-14);
    FlowState h = f_lambda_initial(0.5, y0, x, 50.0, K);
    REQUIRE(h.p == 2);
    CHECK(h.alphas[0] == doctest::Approx(h.alphas[1]).epsilon(1e-12));
}

TEST_CASE("flows are restricted to n >= 7") {
    KField K = catalogued_k("single-bump", 6);
    FlowState s{1, {{point(6, 0.3), 30.0}}, {}, 0.0};
    CHECK_THROWS_AS(integrate_flow(s, K), ValidationError);
}

TEST_CASE("one bubble flows to the maximum and J decreases") {
    const int n = 7;
    KField K = catalogued_k("single-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    FlowResult r = integrate_flow(FlowState{1, {{point(n, 0.3, 0.1), 30.0}}, {}, 0.0}, K, cps, FlowSpec{});
    REQUIRE(r.terminal == FlowTerminal::Cpi);
    REQUIRE(r.cpi.has_value());
    const CriticalPoint& y = cps.points[r.cpi->point_ids[0]];
    CHECK(y.morse_index == n);
    CHECK((r.final_state.bubbles[0].a - y.y).norm() < 1e-3);
    CHECK(std::abs(r.final_J / single_level(n, y.K_value) - 1.0) < 5e-3);
    CHECK(r.trace.energy_violations == 0);
    for (size_t i = 1; i < r.trace.samples.size(); ++i)
        CHECK(r.trace.samples[i].J <= r.trace.samples[i - 1].J * (1.0 + 1e-8));
}

TEST_CASE("the boundary repels") {
    const int n = 7;
    KField K = catalogued_k("single-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    FlowResult r = integrate_flow(FlowState{1, {{point(n, -0.95), 600.0}}, {}, 0.0}, K, cps, FlowSpec{});
    REQUIRE(r.trace.samples.size() > 5);
    double d0 = 1.0 - r.trace.samples[0].bubbles[0].a.norm();
    double d5 = 1.0 - r.trace.samples[5].bubbles[0].a.norm();
    CHECK(d5 > d0);
    CHECK(r.trace.energy_violations == 0);
}

TEST_CASE("two bubbles at distinct maxima reach the pair level") {
    const int n = 7;
    KField K = catalogued_k("two-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    REQUIRE(cps.points.size() >= 2);
    const CriticalPoint& p0 = cps.points[0];
    const CriticalPoint& p1 = cps.points[1];
    Vec x = p1.y;
    x[0] += 0.03;
    x[1] += 0.02;
    FlowResult r = integrate_flow(f_lambda_initial(0.5, p0.y, x, 50.0, K), K, cps, FlowSpec{});
    REQUIRE(r.terminal == FlowTerminal::Cpi);
    REQUIRE(r.cpi->point_ids.size() == 2);
    double level = pair_level(n, p0.K_value, p1.K_value);
    CHECK(std::abs(r.final_J / level - 1.0) < 1e-2);
    CHECK(r.trace.energy_violations == 0);
}

TEST_CASE("two bubbles near one maximum leave V(2, eps)") {
    const int n = 7;
    KField K = catalogued_k("two-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    Vec y = cps.points[0].y;
    Vec a1 = y, a2 = y;
    a1[0] -= 0.04;
    a2[1] += 0.05;
    FlowResult r = integrate_flow(FlowState{2, {{a1, 50.0}, {a2, 60.0}}, {}, 0.0}, K, cps, FlowSpec{});
    CHECK(r.terminal == FlowTerminal::Exit);
    CHECK(has_event(r.trace, "exit"));
    CHECK(r.trace.samples.back().eps12 >= FlowConstants{}.eps);
}

TEST_CASE("normal form constant from single-bubble energies") {
    const int n = 7;
    KField K = catalogued_k("single-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    const Vec& y = cps.points[0].y;
    PsiFit f = fit_psi_constant(y, K, {50, 100, 200, 400});
    CHECK(f.values.size() == 4);
    CHECK(f.c_eff > 0.0);
    CHECK(f.spread < 0.2);
    // psi reproduces the energy it was fit to at the largest lambda
    double J = j_quadrature(Configuration{{{y, 400.0}}, {1.0}, PdeltaMode::Asymptotic}, K);
    CHECK(psi_normal_form(y, 400.0, y, K, f.values.back()) == doctest::Approx(J).epsilon(1e-9));
}

TEST_CASE("intersection estimate") {
    const int n = 7;
    KField K = catalogued_k("two-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    Vec y0 = cps.points[0].y, y1 = cps.points[1].y;
    Vec x = y1;
    x[1] += 0.03;
    // alpha = 1 is a single bubble at y0 and cannot reach the pair
    IntersectionEstimate one = estimate_intersection_number(y0, y1, {x}, {1.0}, 50.0, K);
    CHECK(one.samples == 1);
    CHECK(one.hits == 0);
    IntersectionEstimate half = estimate_intersection_number(y0, y1, {x}, {0.5}, 50.0, K);
    CHECK(half.hits == 1);
    CHECK(half.heuristic);
}

TEST_CASE("lower bound fit takes the 5th percentile") {
    std::vector<double> p, b;
    for (int i = 1; i <= 101; ++i) {
        p.push_back(2.0 * i);
        b.push_back(2.0);
    }
    LowerBoundFit f = fit_lower_bound(p, b);
    CHECK(f.samples == 101);
    CHECK(f.c == 6.0);
    CHECK(f.min_ratio == 1.0);
    CHECK(f.violations_half_c == 2);
    CHECK_THROWS_AS(fit_lower_bound({1.0}, {}), ValidationError);
}

TEST_CASE("the field decreases J along a flow") {
    const int n = 7;
    KField K = catalogued_k("single-bump", n);
    CriticalPointSearch cps = find_critical_points(K);
    FlowState s{1, {{point(n, 0.6, 0.1), 100.0}}, {}, 0.0};
    double pr = pairing_along_field(s, K, cps, FlowConstants{}, EnergySpec{});
    CHECK(pr > 0.0);
    CHECK(pr > 0.5 * lower_bound_expression(s, K) * 1e3);
}

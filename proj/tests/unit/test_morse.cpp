#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/energy.hpp"
#include "bilap/errors.hpp"
#include "bilap/flow.hpp"
#include "bilap/green.hpp"
#include "bilap/morse.hpp"

using namespace bilap;

namespace {

double level1(int n, double K) { return std::pow(S_n(n), 4.0 / n) * std::pow(K, -(n - 4.0) / n); }
double level2(int n, double Ki, double Kj) {
    return std::pow(S_n(n), 4.0 / n) * std::pow(std::pow(Ki, (4.0 - n) / 4) + std::pow(Kj, (4.0 - n) / 4), 4.0 / n);
}

// Poincare-Hopf for grad K pointing inward on the sphere: sum (-1)^index = (-1)^n.
int morse_sum(const CriticalPointSearch& s) {
    int sum = 0;
    for (const CriticalPoint& c : s.points) sum += (c.morse_index % 2) ? -1 : 1;
    return sum;
}

}  // namespace

TEST_CASE("single bump: one maximum, one critical point at infinity") {
    const int n = 7;
    KField K = catalogued_k("single-bump", n);
    CriticalPointSearch s = find_critical_points(K);
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0].morse_index == n);
    CHECK(K.grad(s.points[0].y).norm() < 1e-10);
    CHECK(s.points[0].laplacian_K < 0.0);
    CpiEnumeration e = enumerate_cpi_single(K, s);
    REQUIRE(e.records.size() == 1);
    CHECK(e.records[0].morse_index_at_infinity == 0);
    CHECK(e.records[0].level == doctest::Approx(level1(n, s.points[0].K_value)).epsilon(1e-14));
    CHECK(enumerate_cpi_pairs(K, s).records.empty());
}

TEST_CASE("two bump: two maxima and a saddle; one pair record") {
    const int n = 7;
    KField K = catalogued_k("two-bump", n);
    CriticalPointSearch s = find_critical_points(K);
    REQUIRE(s.points.size() == 3);
    CHECK(s.points[0].morse_index == n);
    CHECK(s.points[1].morse_index == n);
    CHECK(s.points[2].morse_index == n - 1);
    CHECK(s.points[0].y[0] > 0.4);
    CHECK(s.points[1].y[0] < -0.4);
    CHECK(morse_sum(s) == -1);
    for (const CriticalPoint& c : s.points) CHECK(K.grad(c.y).norm() < 1e-10);

    CpiEnumeration single = enumerate_cpi_single(K, s);
    CHECK(single.records.size() == 2);
    REQUIRE(single.excluded.size() == 1);
    CHECK(single.excluded[0] == 2);  // the saddle has Laplacian K > 0
    for (const CpiRecord& r : single.records) CHECK(r.conditions[0] > cpi_tolerance(K, s.points[r.point_ids[0]]));

    CpiEnumeration pairs = enumerate_cpi_pairs(K, s);
    REQUIRE(pairs.records.size() == 1);
    const CpiRecord& r = pairs.records[0];
    CHECK(r.morse_index_at_infinity == 1);
    double K0 = s.points[0].K_value, K1 = s.points[1].K_value;
    CHECK(r.level == doctest::Approx(level2(n, K0, K1)).epsilon(1e-14));
    CHECK(r.level > level1(n, K0));
    CHECK(r.level > level1(n, K1));

    // The balanced two-bubble configuration at lambda = 1e3 has nearly this level.
    std::vector<Bubble> b = {{s.points[0].y, 1e3}, {s.points[1].y, 1e3}};
    Configuration cfg{b, balanced_alphas(b, K), PdeltaMode::Asymptotic};
    CHECK(std::abs(j_expansion(cfg, K).J_expansion / r.level - 1.0) < 1e-2);
}

TEST_CASE("three bump: three maxima, three pair records") {
    const int n = 7;
    KField K = catalogued_k("three-bump", n);
    CriticalPointSearch s = find_critical_points(K);
    CHECK(morse_sum(s) == -1);
    CpiEnumeration single = enumerate_cpi_single(K, s);
    CHECK(single.records.size() == 3);
    for (const CpiRecord& r : single.records) CHECK(r.morse_index_at_infinity == 0);
    CpiEnumeration pairs = enumerate_cpi_pairs(K, s);
    CHECK(pairs.records.size() == 3);
    for (const CpiRecord& r : pairs.records) CHECK(r.morse_index_at_infinity == 1);
}

TEST_CASE("enumeration does not depend on the labels of critical points") {
    const int n = 7;
    KField K = catalogued_k("three-bump", n);
    CriticalPointSearch s = find_critical_points(K);
    CriticalPointSearch t = s;
    std::reverse(t.points.begin(), t.points.end());
    auto key = [&](const CriticalPointSearch& src, const CpiEnumeration& e) {
        std::vector<std::pair<double, int>> out;
        for (const CpiRecord& r : e.records) out.push_back({std::round(r.level * 1e9) / 1e9, r.morse_index_at_infinity});
        std::sort(out.begin(), out.end());
        (void)src;
        return out;
    };
    CHECK(key(s, enumerate_cpi_single(K, s)) == key(t, enumerate_cpi_single(K, t)));
    CHECK(key(s, enumerate_cpi_pairs(K, s)) == key(t, enumerate_cpi_pairs(K, t)));
}

TEST_CASE("dimension six: the H-corrected condition flips with the bump width") {
    const int n = 6;
    auto near_origin = [&](const std::string& name, double& cond) {
        KField K = catalogued_k(name, n);
        CriticalPointSearch s = find_critical_points(K);
        CpiEnumeration e = enumerate_cpi_single(K, s);
        for (size_t i = 0; i < s.points.size(); ++i) {
            if (s.points[i].y.norm() > 0.1) continue;
            cond = cpi_condition(K, s.points[i]);
            // the oracle form of the condition
            double ref = -s.points[i].laplacian_K / (60.0 * s.points[i].K_value) + robin(s.points[i].y);
            CHECK(cond == doctest::Approx(ref).epsilon(1e-12));
            CHECK(s.points[i].morse_index == 0);
            for (const CpiRecord& r : e.records)
                if (r.point_ids[0] == static_cast<int>(i)) return true;
            return false;
        }
        FAIL("no critical point near the origin");
        return false;
    };
    double c15 = 0, c18 = 0;
    CHECK_FALSE(near_origin("borderline(w=0.15)", c15));
    CHECK(near_origin("borderline(w=0.18)", c18));
    CHECK(c15 < 0.0);
    CHECK(c18 > 0.0);
    KField K = catalogued_k("borderline", n);
    CHECK_THROWS_AS(enumerate_cpi_pairs(K, find_critical_points(K)), ValidationError);
}

TEST_CASE("assumption checker") {
    SUBCASE("single bump passes A0, A1, A2") {
        AssumptionReport r = check_assumptions(catalogued_k("single-bump", 7));
        CHECK(r.get("A0").status == "pass");
        CHECK(r.get("A1").status == "pass");
        CHECK(r.get("A2").status == "pass");
        CHECK(r.get("A3").status == "not checked");
        CHECK(r.get("A4").status == "not checked");
        CHECK(r.get("A6").status == "not checked");
        CHECK_FALSE(r.get("A0").witnesses.empty());
        REQUIRE(r.manifolds.size() == 1);
        CHECK(r.manifolds[0].stable == 0);
        CHECK(r.manifolds[0].unstable == 7);
    }
    SUBCASE("A7 fails for heights 1 and 0.9") {
        // 2 / 1^{3/4} < 1 / 0.9^{3/4} is false
        CHECK_FALSE(2.0 / std::pow(1.0, 0.75) < 1.0 / std::pow(0.9, 0.75));
        AssumptionReport r = check_assumptions(catalogued_k("unequal-pair", 7));
        CHECK(r.search.points[0].K_value == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(r.search.points[1].K_value == doctest::Approx(0.9).epsilon(1e-3));
        CHECK(r.get("A7").status == "fail");
        CHECK_FALSE(r.get("A7").witnesses.empty());
    }
    SUBCASE("monkey saddle fails A1 with the degenerate point as witness") {
        AssumptionReport r = check_assumptions(catalogued_k("monkey-saddle", 7));
        CHECK(r.get("A1").status == "fail");
        REQUIRE(r.search.degenerate.size() == 1);
        CHECK(r.search.degenerate[0].y.norm() < 1e-6);
        CHECK_FALSE(r.get("A1").witnesses.empty());
    }
    SUBCASE("constant K fails A0") {
        AssumptionReport r = check_assumptions(catalogued_k("constant", 7));
        CHECK(r.get("A0").status == "fail");
    }
    SUBCASE("A5 is never stronger than partial-by-level") {
        AssumptionReport r = check_assumptions(catalogued_k("two-bump", 7));
        CHECK(r.get("A5").status != "fail");
    }
    CHECK_THROWS(check_assumptions(catalogued_k("two-bump", 7)).get("A9"));
}

TEST_CASE("dimension five has no critical points at infinity") {
    KField K = catalogued_k("single-bump", 5);
    CHECK_THROWS_AS(enumerate_cpi_single(K, find_critical_points(K)), ValidationError);
}

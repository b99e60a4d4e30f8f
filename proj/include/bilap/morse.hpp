#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bilap/kfield.hpp"

namespace bilap {

struct CriticalPoint {
    Vec y;
    double K_value = 0.0;
    int morse_index = 0;  // number of negative Hessian eigenvalues
    double laplacian_K = 0.0;
    double robin_value = std::numeric_limits<double>::quiet_NaN();  // n = 6 only
    Vec eigenvalues;
    double grad_norm = 0.0;
    bool degenerate = false;
};

struct CriticalPointSearch {
    std::vector<CriticalPoint> points;      // nondegenerate, sorted by K descending
    std::vector<CriticalPoint> degenerate;  // rejected, kept as witnesses
    int seeds = 0;
    int converged = 0;
    bool empty = true;
};

// Newton iteration on grad K restricted to span(K.symmetry_directions()) from
// a grid of seeds inside the ball; duplicates merged within 1e-6.
CriticalPointSearch find_critical_points(const KField& K, int seeds_per_axis = 9);

// Sign that decides whether y carries a critical point at infinity:
//   n >= 7: -Laplacian K(y);  n = 6: -Laplacian K(y) / (60 K(y)) + H(y,y).
double cpi_condition(const KField& K, const CriticalPoint& c);
// Width of the band around 0 where the sign is reported as indeterminate.
double cpi_tolerance(const KField& K, const CriticalPoint& c);

struct CpiRecord {
    std::vector<Vec> points;
    std::vector<int> point_ids;  // indices into CriticalPointSearch::points
    double level = 0.0;
    int morse_index_at_infinity = 0;
    std::vector<double> conditions;
};

struct CpiEnumeration {
    std::vector<CpiRecord> records;
    std::vector<int> excluded;       // point ids failing the sign condition
    std::vector<int> indeterminate;  // point ids within the tolerance band
};

double single_level(int n, double K_y);                // S_n^{4/n} K^{-(n-4)/n}
double pair_level(int n, double K_i, double K_j);     // S_n^{4/n} (K_i^{(4-n)/4} + K_j^{(4-n)/4})^{4/n}

CpiEnumeration enumerate_cpi_single(const KField& K, const CriticalPointSearch& cps);
// Requires n >= 7.
CpiEnumeration enumerate_cpi_pairs(const KField& K, const CriticalPointSearch& cps);

struct AssumptionResult {
    std::string name;
    std::string status;  // pass | fail | partial | not checked
    std::string detail;
    std::vector<std::string> witnesses;
};

struct ManifoldDims {
    int point_id = 0;
    int stable = 0;    // n - index, for the descending flow of K
    int unstable = 0;  // index
};

struct AssumptionOptions {
    int boundary_samples = 2000;
    int shooting_directions = 8;  // per unstable subspace, beyond the eigenvectors
    std::uint64_t seed = 1;
};

struct AssumptionReport {
    int n = 0;
    CriticalPointSearch search;
    std::vector<AssumptionResult> results;  // A0, A1, A2, A2', A3, A4, A5, A6, A7
    std::vector<ManifoldDims> manifolds;
    double min_K_sampled = 0.0;
    const AssumptionResult& get(const std::string& name) const;
};

AssumptionReport check_assumptions(const KField& K, const AssumptionOptions& opt = {});

}  // namespace bilap

#pragma once

#include <vector>

namespace bilap {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// Cached Gauss-Legendre rule with m nodes.
const GaussRule& gauss_legendre(int m);

// Integrate f over [a, b] with a single m-point Gauss-Legendre panel.
template <class F>
double gauss_panel(F&& f, double a, double b, int m) {
    const GaussRule& g = gauss_legendre(m);
    double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
    for (int i = 0; i < m; ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    return half * s;
}

}  // namespace bilap

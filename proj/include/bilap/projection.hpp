#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "bilap/bubbles.hpp"
#include "bilap/numerics/ball_quadrature.hpp"

namespace bilap {

enum class PdeltaMode { Exact, Asymptotic };

struct ProjectionSpec {
    // Quadrature for one pointwise evaluation of phi = delta - P delta.
    QuadratureSpec inner{10, 16, 1.0, 1e-8, 0.0, false, 0, 0};
    // Chebyshev table over (log-radial distance from a, cosine to a/|a|).
    int table_radial = 32;
    int table_angular = 12;
    bool use_table = true;
};

// phi(x) = delta(x) - P delta(x) for the exact projection, from
//   phi(x) = kappa_n^{-1} [ int_Omega H(x,z) delta^p(z) dz
//                          + int_{R^n \ Omega} |x-z|^{4-n} delta^p(z) dz ].
double phi_exact(const Bubble& b, const Vec& x, const QuadratureSpec& spec);
// c_n lambda^{-(n-4)/2} H(a, x).
double phi_asymptotic(const Bubble& b, const Vec& x);

struct PhiTable;

class ProjectedBubble {
public:
    ProjectedBubble(Bubble b, PdeltaMode mode, const ProjectionSpec& spec = {});

    const Bubble& bubble() const { return b_; }
    PdeltaMode mode() const { return mode_; }
    int dim() const { return static_cast<int>(b_.a.size()); }

    double delta(const Vec& x) const { return delta_eval(b_, x); }
    double phi(const Vec& x) const;
    double value(const Vec& x) const { return delta(x) - phi(x); }
    // Parameter derivatives of P delta; the exact mode uses those of delta
    // corrected by the asymptotic H-term.
    DeltaParamGrad params_grad(const Vec& x) const;

private:
    Bubble b_;
    PdeltaMode mode_;
    ProjectionSpec spec_;
    std::shared_ptr<const PhiTable> table_;
};

// Pointwise P delta; exact mode evaluates phi directly, without the table.
double pdelta(const ProjectedBubble& pb, const Vec& x, const QuadratureSpec& spec);

// (P delta_i, P delta_j)_2 = int_Omega P delta_i delta_j^p.
double inner_product(const ProjectedBubble& ui, const ProjectedBubble& uj,
                     const QuadratureSpec& spec);
// S_n - ||P delta||_2^2 = int_{R^n \ Omega} delta^q + int_Omega phi delta^p.
double projection_deficit(const ProjectedBubble& u, const QuadratureSpec& spec);

struct Configuration {
    std::vector<Bubble> bubbles;
    std::vector<double> alphas;
    PdeltaMode mode = PdeltaMode::Exact;
};

// A function on the ball given by an evaluator. Its dependence on y must be
// through projections onto `directions` and |y_perp| (used for quadrature).
struct SampledFunction {
    int n = 0;
    std::function<double(const Vec&)> f;
    std::vector<Vec> directions;
    // ||u||_2^2 when known; needed only for the reported residual norm.
    double norm2 = std::numeric_limits<double>::quiet_NaN();
};

// Axisymmetric gridded function: values on a tensor grid in (z, r) where
// z = y . axis and r = |y - z axis|; local cubic Lagrange interpolation.
struct AxisymmetricGrid {
    int n = 0;
    Vec axis;
    std::vector<double> z, r;  // ascending node coordinates
    std::vector<double> values;  // row-major, index iz * r.size() + ir
    double interpolate(const Vec& y) const;
};

// Text layout: header line "axisymmetric-grid n nz nr", a line with the axis
// (n numbers), a line with nz z-coordinates, a line with nr r-coordinates,
// then nz lines of nr values. Lines starting with '#' are comments.
AxisymmetricGrid read_grid(const std::string& path);
void write_grid(const AxisymmetricGrid& g, const std::string& path);
SampledFunction to_sampled(const AxisymmetricGrid& g);

struct DecomposeOptions {
    PdeltaMode mode = PdeltaMode::Exact;
    ProjectionSpec projection;
    QuadratureSpec quad{8, 16, 1.0, 1e-9, 0.0, false, 0, 0};
    int max_iterations = 40;
    double tolerance = 1e-9;  // relative V0 residual
    std::vector<Bubble> initial;  // optional initial guess
};

struct DecomposeResult {
    Configuration config;
    double residual_norm = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> v0_residuals;  // (res, P delta_i), (res, lambda dP/dlambda), (res, dP/da / lambda)...
    int iterations = 0;
    bool degenerate = false;  // near-singular Gram matrix
};

DecomposeResult decompose(const SampledFunction& u, int p, const DecomposeOptions& opt = {});

}  // namespace bilap

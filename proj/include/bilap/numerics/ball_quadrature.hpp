#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace bilap {

using Vec = Eigen::VectorXd;

struct QuadratureSpec {
    int radial_nodes = 8;      // Gauss nodes per radial panel
    int angular_nodes = 16;    // Gauss nodes per polar angle
    double panel_width = 1.0;  // width of radial panels in log(lambda * rho)
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    bool estimate_error = true;
    int max_refinements = 2;
    std::uint64_t seed = 0;    // rules are deterministic; kept for manifests
};

struct Center {
    Vec a;
    double lambda = 1.0;
    // Length scale^{-1} used by the partition of unity; 0 means lambda.
    double partition_scale = 0.0;
};

// Ball: the unit ball; Space: all of R^n; Exterior: R^n minus the ball.
enum class Domain { Ball, Space, Exterior };

// Integrand description for integrate_ball.
//
// The engine works in polar coordinates around each center, with radial
// variable s = log(lambda * rho) split into Gauss panels and the boundary of
// the unit ball as a panel break. Integrands must depend on the point y only
// through its projections onto span(centers, directions) and through
// |y_perp|; this lets the angular rule run over k = dim(span) polar angles
// instead of the full sphere. Several centers are combined with a smooth
// partition of unity that vanishes at every other center.
struct BallIntegrand {
    int n = 0;
    int components = 1;
    std::vector<Center> centers;
    std::vector<Vec> directions;
    Domain domain = Domain::Ball;
    // Near a center the integrand times rho^{n-1} behaves like rho^{center_power-1}.
    double center_power = 0.0;  // 0 means n
    // For Domain::Space, f * rho^n decays like rho^{-decay_power} at infinity.
    double decay_power = 0.0;   // 0 means n
    // Exclude rho < excluded_radius around the (single) center.
    double excluded_radius = 0.0;
    std::function<void(const Vec& y, double* out)> f;
};

struct QuadResult {
    std::vector<double> value;
    std::vector<double> error;  // NaN when not estimated
    long evaluations = 0;
};

QuadResult integrate_ball(const BallIntegrand& in, const QuadratureSpec& spec);

// Scalar convenience form over the unit ball.
double integrate_ball(const std::function<double(const Vec&)>& f, int n,
                      const std::vector<Center>& centers, const QuadratureSpec& spec,
                      const std::vector<Vec>& directions = {});

// Orthonormal basis of span(vectors), Gram-Schmidt in input order.
std::vector<Vec> span_basis(const std::vector<Vec>& vectors, double tol = 1e-12);

}  // namespace bilap

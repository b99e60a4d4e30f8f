#pragma once

#include <limits>
#include <string>
#include <vector>

#include "bilap/kfield.hpp"
#include "bilap/projection.hpp"

namespace bilap {

struct EnergySpec {
    QuadratureSpec quad{10, 16, 0.5, 1e-11, 0.0, false, 0, 0};
    ProjectionSpec projection;
};

struct EnergyReport {
    double J_quadrature = std::numeric_limits<double>::quiet_NaN();
    double J_expansion = 0.0;
    // J_expansion == ((leading + delta_k_term) + h_term) + eps_term
    double leading = 0.0;
    double delta_k_term = 0.0;
    double h_term = 0.0;
    double eps_term = 0.0;
    // leading * (sum 1/lambda^2 + sum (lambda d)^{4-n} + sum eps_ij); the
    // remainder is o() of this.
    double remainder_scale = 0.0;
    std::string remainder_order = "o(sum 1/lambda_k^2 + sum 1/(lambda_k d_k)^(n-4) + sum eps_ij)";
};

// Projected bubbles of a configuration (tables built once).
std::vector<ProjectedBubble> project(const Configuration& cfg, const ProjectionSpec& spec = {});

// ||u||_2^2 for u = sum alpha_i P delta_i.
double config_norm2(const Configuration& cfg, const std::vector<ProjectedBubble>& pb,
                    const QuadratureSpec& spec);
// J(u / ||u||) by quadrature.
double j_quadrature(const Configuration& cfg, const KField& K, const EnergySpec& spec = {});
double j_quadrature(const Configuration& cfg, const std::vector<ProjectedBubble>& pb,
                    const KField& K, const QuadratureSpec& spec);
// Expansion of J with the v-terms dropped; J_quadrature left NaN.
EnergyReport j_expansion(const Configuration& cfg, const KField& K);
EnergyReport energy_report(const Configuration& cfg, const KField& K, const EnergySpec& spec = {});

// Expansion of ||u||_2^2 through (P delta_i, P delta_j)_2 ~ c2 (eps_ij - H_ij/(lambda_i lambda_j)^{(n-4)/2}).
double config_norm2_expansion(const Configuration& cfg);

struct PairingDirection {
    enum class Kind { Lambda, A };
    Kind kind = Kind::Lambda;
    int index = 0;
    Vec e;  // unit vector for Kind::A
    std::string label() const;
};

// (dJ(u), lambda_i dP delta_i/d lambda_i)_2 or (dJ(u), lambda_i^{-1} dP delta_i/da_i . e)_2
// for the normalized u, remainders dropped.
double grad_pairing_expansion(const Configuration& cfg, const KField& K, const PairingDirection& d);

struct FdSpec {
    double h = 0.05;  // second step is h / 2
    EnergySpec energy;
};

struct PairingReport {
    PairingDirection direction;
    double expansion = 0.0;
    double fd = 0.0;          // Richardson extrapolant of the two central differences
    double fd_h = 0.0;        // step h
    double fd_h2 = 0.0;       // step h / 2
    double step_change = 0.0;  // |fd_h2 - fd_h| / |fd_h2|
    double relative_gap = 0.0;  // |fd - expansion| / |fd|
    double noise_floor = 0.0;   // quadrature-error bound on the difference quotient
    bool noisy = false;
};

// Central differences of j_quadrature under lambda -> lambda e^{+-h} or
// a -> a +- h e / lambda, divided by the normalized weight alpha_i / ||u||.
PairingReport grad_pairing_fd(const Configuration& cfg, const KField& K, const PairingDirection& d,
                              const FdSpec& spec = {});

struct NegativePartOptions {
    double eta = 1e-2;
    std::vector<Center> centers;  // concentration centers for the quadrature
    QuadratureSpec quad{10, 16, 0.5, 1e-10, 0.0, false, 0, 0};
};

struct NegativePartReport {
    double neg_norm = 0.0;  // |u^-|_{L^q}
    double J = std::numeric_limits<double>::quiet_NaN();
    double indicator = std::numeric_limits<double>::quiet_NaN();  // J^{(2n-4)/(n-4)} e^{2J} |u^-|^{8/(n-4)}
    bool in_V_eta = false;
};

// J of u needs ||u||_2^2; when u.norm2 is unknown and u has a negative part
// the membership cannot be decided and ValidationError is thrown.
NegativePartReport negative_part_indicator(const SampledFunction& u, const KField& K,
                                           const NegativePartOptions& opt = {});

}  // namespace bilap

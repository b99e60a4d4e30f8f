#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bilap/energy.hpp"
#include "bilap/morse.hpp"
#include "bilap/numerics/ode.hpp"

namespace bilap {

struct FlowConstants {
    double d0 = 0.1;
    double C1 = 10.0;
    double C2 = 100.0;
    double M = 100.0;
    double M1 = 10.0;
    double M2 = 100.0;
    double m = 100.0;
    double eps = 0.05;         // V(p, eps)
    double lambda_cap = 1e3;
    double cpi_tol = 1e-3;     // |a - y| at CPI detection
    double drift = 1.0;        // da/dt = drift * grad K(a) near critical points
    double band = 0.1;         // relative half-width of the blending bands
};

struct FlowState {
    int p = 1;
    std::vector<Bubble> bubbles;
    std::vector<double> alphas;  // normalized, balanced
    double time = 0.0;
};

struct FlowVelocity {
    std::vector<Vec> da;               // da_i/dt
    std::vector<double> dlog_lambda;   // d(log lambda_i)/dt
    std::string regime;                // dominant case
    bool relabeled = false;            // lambda_1 > lambda_2 in the input labels
};

// Balanced weights alpha_i ~ K(a_i)^{-(n-4)/8}, normalized with the expanded norm.
std::vector<double> balanced_alphas(const std::vector<Bubble>& b, const KField& K);

struct Membership {
    bool inside = true;
    std::string reason;
};
Membership v_membership(const FlowState& s, const FlowConstants& c);

FlowVelocity y1_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                      const FlowConstants& c);
FlowVelocity y2_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                      const FlowConstants& c);
FlowVelocity flow_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                        const FlowConstants& c);

struct FlowSample {
    double t = 0.0;
    std::vector<Bubble> bubbles;
    double J = 0.0;  // j_expansion
    std::string regime;
    double eps12 = 0.0;
};

struct FlowEvent {
    double t = 0.0;
    std::string kind;    // regime | relabel | exit | cpi | budget | alpha-slaved | stiffness
    std::string detail;
};

struct FlowTrace {
    std::vector<FlowSample> samples;
    std::vector<FlowEvent> events;
    long accepted = 0;
    long rejected = 0;
    int energy_violations = 0;   // accepted steps where J rose by more than 1e-8 relative
    double max_energy_rise = 0.0;  // largest relative rise
};

enum class FlowTerminal { Cpi, Exit, Budget };
std::string to_string(FlowTerminal t);

struct FlowResult {
    FlowTrace trace;
    FlowTerminal terminal = FlowTerminal::Budget;
    FlowState final_state;
    std::optional<CpiRecord> cpi;
    std::string exit_reason;
    double final_J = 0.0;
};

struct FlowSpec {
    FlowConstants constants;
    OdeSpec ode{1e-3, 1e-8, 1e-10, 200000, 1e-9, 1e4, 1e-14};
    double lambda_escape = 1e6;  // budget stop when some lambda exceeds this without a CPI
};

FlowResult integrate_flow(const FlowState& init, const KField& K, const FlowSpec& spec = {});
// Reuses a critical point search.
FlowResult integrate_flow(const FlowState& init, const KField& K, const CriticalPointSearch& cps,
                          const FlowSpec& spec);

// Psi(a, lambda) = S_n^{4/n} K(a)^{-(n-4)/n} (1 - c_eff Laplacian K(y) / (lambda^2 K(y)^{n/4})).
double psi_normal_form(const Vec& a, double lambda, const Vec& y, const KField& K, double c_eff);

struct PsiFit {
    std::vector<double> lambdas;
    std::vector<double> values;  // c_eff per lambda
    double c_eff = 0.0;          // mean
    double spread = 0.0;         // (max - min) / |mean|
};
// c_eff from single-bubble j_quadrature at a = y over the ladder.
PsiFit fit_psi_constant(const Vec& y, const KField& K, const std::vector<double>& lambdas,
                        PdeltaMode mode = PdeltaMode::Asymptotic, const EnergySpec& spec = {});

// The normalized two-bubble configuration of the map f_lambda; alpha in {0,1}
// reduces to one bubble.
FlowState f_lambda_initial(double alpha, const Vec& y0, const Vec& x, double lambda, const KField& K);

struct IntersectionEstimate {
    int samples = 0;
    int hits = 0;        // flows ending at the two-mass CPI (y0, y_i)
    int other_cpi = 0;
    int exits = 0;
    int unresolved = 0;  // budget or numerical failure
    int parity = 0;
    int refined_hits = 0;
    int refined_parity = 0;
    bool stable = false;  // parity unchanged under grid refinement
    bool heuristic = true;
};

IntersectionEstimate estimate_intersection_number(const Vec& y0, const Vec& yi,
                                                  const std::vector<Vec>& x_samples,
                                                  const std::vector<double>& alphas, double lambda,
                                                  const KField& K, const FlowSpec& spec = {});

// <-dJ(u), Y>_2 by central differences of j_quadrature along the field, with
// each bubble's parameter velocity divided by its normalized weight; the step
// is scaled so no parameter moves by more than h.
double pairing_along_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                           const FlowConstants& c, const EnergySpec& spec, double h = 1e-3);
// sum lambda^-2 + sum |grad K|/lambda + sum (lambda d)^{-(n-3)} [+ eps12^{(n-3)/(n-4)}].
double lower_bound_expression(const FlowState& s, const KField& K);

struct LowerBoundFit {
    double c = 0.0;       // 5th percentile of pairing / bound
    double min_ratio = 0.0;
    int samples = 0;
    int violations_half_c = 0;
};
LowerBoundFit fit_lower_bound(const std::vector<double>& pairings, const std::vector<double>& bounds);

}  // namespace bilap

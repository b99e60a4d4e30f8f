#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "bilap/errors.hpp"

namespace bilap {

struct OdeSpec {
    double initial_step = 1e-3;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    long max_steps = 100000;
    double event_tol = 1e-10;  // bisection width in time
    double t_max = std::numeric_limits<double>::infinity();
    double min_step = 1e-14;
};

using OdeField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;
using OdeEvent = std::function<bool(double t, const Eigen::VectorXd& x)>;
// Called after each accepted step (and once for the initial state).
using OdeObserver = std::function<void(double t, const Eigen::VectorXd& x)>;

enum class OdeTerminal { Event, Budget };

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> x;
    OdeTerminal terminal = OdeTerminal::Budget;
    int event_index = -1;
    long accepted = 0;
    long rejected = 0;
};

class OdeStiffnessError : public NumericalError {
public:
    OdeStiffnessError(const std::string& what, Trajectory partial)
        : NumericalError(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

// Dormand-Prince 5(4) with local error control. Stops at the first event whose
// predicate becomes true (located by bisection to spec.event_tol) or when the
// step or time budget is exhausted.
Trajectory ode_integrate(const OdeField& field, const Eigen::VectorXd& x0,
                         const std::vector<OdeEvent>& events, const OdeSpec& spec,
                         double t0 = 0.0, const OdeObserver& observer = nullptr);

}  // namespace bilap

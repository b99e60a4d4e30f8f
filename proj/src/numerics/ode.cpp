#include "bilap/numerics/ode.hpp"

#include <algorithm>
#include <cmath>

namespace bilap {

namespace {

using Eigen::VectorXd;

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Step {
    VectorXd x;
    VectorXd err;
};

Step dp_step(const OdeField& f, double t, const VectorXd& x, const VectorXd& k1, double h) {
    VectorXd k2 = f(t + c2 * h, x + h * a21 * k1);
    VectorXd k3 = f(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    VectorXd k4 = f(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    VectorXd k5 = f(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    VectorXd k6 = f(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    VectorXd xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    VectorXd k7 = f(t + h, xn);
    VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {xn, err};
}

int first_event(const std::vector<OdeEvent>& events, double t, const VectorXd& x) {
    for (size_t i = 0; i < events.size(); ++i)
        if (events[i](t, x)) return static_cast<int>(i);
    return -1;
}

}  // namespace

Trajectory ode_integrate(const OdeField& field, const VectorXd& x0,
                         const std::vector<OdeEvent>& events, const OdeSpec& spec, double t0,
                         const OdeObserver& observer) {
    if (!(spec.rel_tol > 0 && spec.abs_tol > 0 && spec.event_tol > 0 && spec.initial_step > 0))
        throw ValidationError("ode_integrate: tolerances must be positive");
    Trajectory tr;
    double t = t0;
    VectorXd x = x0;
    tr.t.push_back(t);
    tr.x.push_back(x);
    if (observer) observer(t, x);
    if (int ev = first_event(events, t, x); ev >= 0) {
        tr.terminal = OdeTerminal::Event;
        tr.event_index = ev;
        return tr;
    }
    double h = spec.initial_step;
    VectorXd k1 = field(t, x);
    while (tr.accepted < spec.max_steps && t < spec.t_max) {
        h = std::min(h, spec.t_max - t);
        Step st = dp_step(field, t, x, k1, h);
        double en = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double sc = spec.abs_tol + spec.rel_tol * std::max(std::fabs(x[i]), std::fabs(st.x[i]));
            en += (st.err[i] / sc) * (st.err[i] / sc);
        }
        en = x.size() > 0 ? std::sqrt(en / x.size()) : 0.0;
        if (!std::isfinite(en) || en > 1.0) {
            ++tr.rejected;
            double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h *= fac;
            if (h < spec.min_step)
                throw OdeStiffnessError("ode_integrate: step size underflow", tr);
            continue;
        }
        double tn = t + h;
        int ev = -1;
        double t_hit = tn;
        VectorXd x_hit = st.x;
        for (size_t i = 0; i < events.size(); ++i) {
            if (!events[i](tn, st.x)) continue;
            double lo = 0.0, hi = 1.0;
            VectorXd xhi = st.x;
            while ((hi - lo) * h > spec.event_tol) {
                double mid = 0.5 * (lo + hi);
                VectorXd xm = dp_step(field, t, x, k1, mid * h).x;
                if (events[i](t + mid * h, xm))
                    hi = mid, xhi = xm;
                else
                    lo = mid;
            }
            if (ev < 0 || t + hi * h < t_hit) {
                ev = static_cast<int>(i);
                t_hit = t + hi * h;
                x_hit = xhi;
            }
        }
        ++tr.accepted;
        if (ev >= 0) {
            tr.t.push_back(t_hit);
            tr.x.push_back(x_hit);
            if (observer) observer(t_hit, x_hit);
            tr.terminal = OdeTerminal::Event;
            tr.event_index = ev;
            return tr;
        }
        t = tn;
        x = st.x;
        tr.t.push_back(t);
        tr.x.push_back(x);
        if (observer) observer(t, x);
        k1 = field(t, x);
        double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    tr.terminal = OdeTerminal::Budget;
    return tr;
}

}  // namespace bilap

#include "bilap/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/green.hpp"

namespace bilap {

namespace {

double smoothstep(double x, double lo, double hi) {
    double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Soft indicator of x >= T with a relative band.
double at_least(double x, double T, double band) { return smoothstep(x, T * (1.0 - band), T * (1.0 + band)); }

struct Nearest {
    int id = -1;
    double dist = 0.0;
    double sign = 1.0;  // sign(-Laplacian K(y))
};

Nearest nearest_critical(const Vec& a, const KField& K, const CriticalPointSearch& cps) {
    Nearest best;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cps.points.size(); ++i) {
        double d = (cps.points[i].y - a).norm();
        if (d < bd || best.id < 0) bd = d, best.id = static_cast<int>(i);
    }
    if (best.id < 0) throw ValidationError("flow: K has no nondegenerate critical points");
    best.dist = bd;
    const CriticalPoint& c = cps.points[static_cast<size_t>(best.id)];
    best.sign = -K.laplacian(c.y) > 0 ? 1.0 : -1.0;
    return best;
}

Vec outward(const Vec& a) {
    double r = a.norm();
    if (r < 1e-300) {
        Vec e = Vec::Zero(a.size());
        e[0] = 1.0;
        return e;
    }
    return a / r;
}

// Parameter velocity accumulator.
struct Vel {
    std::vector<Vec> da;
    std::vector<double> dl;
    explicit Vel(int p = 0, int n = 0) : da(static_cast<size_t>(p), Vec::Zero(n)), dl(static_cast<size_t>(p), 0.0) {}
    void add(const Vel& o, double w) {
        if (w == 0.0) return;
        for (size_t i = 0; i < da.size(); ++i) da[i] += w * o.da[i], dl[i] += w * o.dl[i];
    }
};

struct Contribution {
    double w;
    std::string label;
};

std::string dominant(const std::vector<Contribution>& parts) {
    const Contribution* best = nullptr;
    for (const Contribution& c : parts)
        if (!best || c.w > best->w) best = &c;
    return best ? best->label : "";
}

void require_flow_dim(int n) {
    if (n < 7) throw ValidationError("pseudogradient flows are defined for n >= 7");
}

// Single-bubble field on bubble (a, lambda); regime weights appended to parts.
Vel y1_single(const Vec& a, double lam, const KField& K, const CriticalPointSearch& cps,
              const FlowConstants& c, std::vector<Contribution>* parts, double scale) {
    const int n = K.dim();
    Vel v(1, n);
    double d = boundary_distance(a);
    double w1 = 1.0 - smoothstep(d, (1.0 - c.band) * c.d0, (1.0 + c.band) * c.d0);
    Vec g = K.grad(a);
    double gn = g.norm();
    double tau = smoothstep(lam * gn, c.C2, 2.0 * c.C2);
    // W1: -lambda^{-1} dP delta/da . nu
    v.da[0] += w1 * (-outward(a) / lam);
    // W2: lambda^{-1} dP delta/da . grad K / |grad K|
    if (gn > 0) v.da[0] += (1.0 - w1) * tau * g / (lam * gn);
    // W3: sign(-Laplacian K(y)) lambda dP delta/d lambda, with a drift toward y
    Nearest y = nearest_critical(a, K, cps);
    v.dl[0] += (1.0 - w1) * (1.0 - tau) * y.sign;
    v.da[0] += (1.0 - w1) * (1.0 - tau) * c.drift * g;
    if (parts) {
        parts->push_back({scale * w1, "W1"});
        parts->push_back({scale * (1.0 - w1) * tau, "W2"});
        parts->push_back({scale * (1.0 - w1) * (1.0 - tau), "W3"});
    }
    return v;
}

// A1 field with bubble `s` the one with the smaller lambda ("1") and `b` the larger ("2").
Vel a1_field(const FlowState& st, int s, int b, const KField& K, const CriticalPointSearch& cps,
             const FlowConstants& c, std::vector<Contribution>& parts, double scale) {
    const int n = K.dim();
    Vel v(2, n);
    const Bubble& B1 = st.bubbles[static_cast<size_t>(s)];
    const Bubble& B2 = st.bubbles[static_cast<size_t>(b)];
    const double l1 = B1.lambda, l2 = B2.lambda;
    const double e12 = eps(B1, B2);
    Vec g1 = K.grad(B1.a), g2 = K.grad(B2.a);
    double G1 = at_least(l1 * g1.norm(), c.C2, c.band);
    double G2 = at_least(l2 * g2.norm(), c.C2, c.band);
    double E = at_least(e12 * l2 * l2, c.C1, c.band);
    double R = at_least(10.0 * l1 / l2, 1.0, c.band);
    Nearest y1 = nearest_critical(B1.a, K, cps), y2 = nearest_critical(B2.a, K, cps);

    auto mover_grad = [&](int i, const Vec& g, double lam) {
        Vel m(2, n);
        if (g.norm() > 0) m.da[static_cast<size_t>(i)] = g / (lam * g.norm());
        return m;
    };
    // sum over T of the grad K movers
    Vel WT(2, n);
    WT.add(mover_grad(s, g1, l1), G1);
    WT.add(mover_grad(b, g2, l2), G2);

    Vel W1(2, n);
    W1.dl[static_cast<size_t>(b)] = -c.M;
    W1.add(WT, 1.0);
    Vel W2 = W1;
    W2.dl[static_cast<size_t>(s)] += std::sqrt(c.M) * y1.sign;
    Vel W3p = WT;
    Vel W3pp = mover_grad(b, g2, l2);
    W3pp.dl[static_cast<size_t>(s)] += y1.sign;
    Vel W4(2, n);
    bool same = y1.id == y2.id;
    if (same) {
        W4.dl[static_cast<size_t>(s)] = y1.sign;
    } else if (y1.sign < 0) {
        W4.dl[static_cast<size_t>(s)] = -1.0;
    } else if (y2.sign < 0) {
        W4.dl[static_cast<size_t>(b)] = -R;
        W4.dl[static_cast<size_t>(s)] = 1.0 - R;
    } else {
        W4.dl[static_cast<size_t>(s)] = 1.0;
        W4.dl[static_cast<size_t>(b)] = 1.0;
    }
    double sub1 = E * (1.0 - (1.0 - R) * (1.0 - G1));
    double sub2 = E * (1.0 - R) * (1.0 - G1);
    double sub3 = (1.0 - E) * (1.0 - (1.0 - G1) * (1.0 - G2));
    double w3pp = (1.0 - G1) * (1.0 - R);
    double sub4 = (1.0 - E) * (1.0 - G1) * (1.0 - G2);
    v.add(W1, sub1);
    v.add(W2, sub2);
    v.add(W3p, sub3 * (1.0 - w3pp));
    v.add(W3pp, sub3 * w3pp);
    v.add(W4, sub4);
    // drift of points sitting near critical points of K
    v.da[static_cast<size_t>(s)] += (1.0 - G1) * c.drift * g1;
    v.da[static_cast<size_t>(b)] += (1.0 - G2) * c.drift * g2;
    parts.push_back({scale * sub1, "A1/W1"});
    parts.push_back({scale * sub2, "A1/W2"});
    parts.push_back({scale * sub3 * (1.0 - w3pp), "A1/W3'"});
    parts.push_back({scale * sub3 * w3pp, "A1/W3''"});
    parts.push_back({scale * sub4, same ? "A1/W4'" : "A1/W4''"});
    return v;
}

}  // namespace

std::vector<double> balanced_alphas(const std::vector<Bubble>& b, const KField& K) {
    const int n = K.dim();
    Configuration cfg;
    cfg.bubbles = b;
    cfg.mode = PdeltaMode::Asymptotic;
    for (const Bubble& x : b) {
        double k = K.value(x.a);
        if (!(k > 0)) throw ValidationError("balanced_alphas: K must be positive");
        cfg.alphas.push_back(std::pow(k, -(n - 4.0) / 8.0));
    }
    double s = std::sqrt(config_norm2_expansion(cfg));
    for (double& a : cfg.alphas) a /= s;
    return cfg.alphas;
}

Membership v_membership(const FlowState& s, const FlowConstants& c) {
    Membership m;
    for (size_t i = 0; i < s.bubbles.size(); ++i) {
        const Bubble& b = s.bubbles[i];
        double d = boundary_distance(b.a);
        if (!(d > 0)) return {false, "a_" + std::to_string(i + 1) + " left the ball"};
        if (!(b.lambda * d > 1.0 / c.eps))
            return {false, "lambda_" + std::to_string(i + 1) + " d_" + std::to_string(i + 1) + " <= 1/eps"};
    }
    if (s.bubbles.size() == 2 && !(eps(s.bubbles[0], s.bubbles[1]) < c.eps))
        return {false, "eps_12 >= eps"};
    return m;
}

FlowVelocity y1_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                      const FlowConstants& c) {
    require_flow_dim(K.dim());
    if (s.bubbles.size() != 1) throw ValidationError("y1_field needs one bubble");
    std::vector<Contribution> parts;
    Vel v = y1_single(s.bubbles[0].a, s.bubbles[0].lambda, K, cps, c, &parts, 1.0);
    return {v.da, v.dl, dominant(parts), false};
}

FlowVelocity y2_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                      const FlowConstants& c) {
    const int n = K.dim();
    require_flow_dim(n);
    if (s.bubbles.size() != 2) throw ValidationError("y2_field needs two bubbles");
    const Bubble& B1 = s.bubbles[0];
    const Bubble& B2 = s.bubbles[1];
    const double d1 = boundary_distance(B1.a), d2 = boundary_distance(B2.a);
    const double bd = c.band;
    double near1 = 1.0 - at_least(d1, c.d0, bd), near2 = 1.0 - at_least(d2, c.d0, bd);
    double far1 = at_least(d1, 2.0 * c.d0, bd), far2 = at_least(d2, 2.0 * c.d0, bd);
    double wA1 = (1.0 - near1) * (1.0 - near2);
    double wA2_1 = near1 * far2, wA2_2 = near2 * far1;
    double wA3 = std::max(0.0, 1.0 - wA1 - wA2_1 - wA2_2);

    std::vector<Contribution> parts;
    Vel v(2, n);
    bool relabeled = B1.lambda > B2.lambda;
    if (wA1 > 0) {
        double om = smoothstep(std::log(B2.lambda / B1.lambda), -0.05, 0.05);
        Vel f(2, n);
        if (om > 0) f.add(a1_field(s, 0, 1, K, cps, c, parts, wA1 * om), om);
        if (om < 1) f.add(a1_field(s, 1, 0, K, cps, c, parts, wA1 * (1.0 - om)), 1.0 - om);
        v.add(f, wA1);
    }
    for (int i = 0; i < 2; ++i) {
        double w = i == 0 ? wA2_1 : wA2_2;
        if (w <= 0) continue;
        int j = 1 - i;
        const Bubble& Bi = s.bubbles[static_cast<size_t>(i)];
        const Bubble& Bj = s.bubbles[static_cast<size_t>(j)];
        Vel f(2, n);
        // W5: a_i along the inward normal; W6 adds Y1 on the other bubble.
        f.da[static_cast<size_t>(i)] = -outward(Bi.a) / Bi.lambda;
        double w6 = at_least(Bi.lambda / (10.0 * Bj.lambda), 1.0, bd);
        Vel y1 = y1_single(Bj.a, Bj.lambda, K, cps, c, nullptr, 0.0);
        f.da[static_cast<size_t>(j)] += w6 * y1.da[0];
        f.dl[static_cast<size_t>(j)] += w6 * y1.dl[0];
        v.add(f, w);
        parts.push_back({w * (1.0 - w6), "A2/W5"});
        parts.push_back({w * w6, "A2/W6"});
    }
    if (wA3 > 0) {
        double dr = std::max(d1 / d2, d2 / d1);
        double lr = std::max(B1.lambda / B2.lambda, B2.lambda / B1.lambda);
        double c1 = at_least(dr, c.M1, bd);
        double c3 = (1.0 - c1) * at_least(lr, c.M2, bd);
        double c2w = (1.0 - c1) - c3;
        Vel W7(2, n);
        for (int i = 0; i < 2; ++i) {
            const Bubble& Bi = s.bubbles[static_cast<size_t>(i)];
            W7.da[static_cast<size_t>(i)] = -outward(Bi.a) / Bi.lambda;
        }
        Vel f(2, n);
        f.add(W7, c1);
        if (c2w > 0) {
            std::vector<double> al = balanced_alphas(s.bubbles, K);
            double lmax = std::max(B1.lambda, B2.lambda);
            Vel W8(2, n);
            for (int i = 0; i < 2; ++i)
                W8.da[static_cast<size_t>(i)] = -al[static_cast<size_t>(i)] * outward(s.bubbles[static_cast<size_t>(i)].a) / lmax;
            // W9 joins when eps_12 exceeds m / (lambda_i d_i)^{n-4} for both bubbles.
            double e12 = eps(B1, B2);
            double w9 = at_least(e12 * std::pow(B1.lambda * d1, n - 4.0), c.m, bd) *
                        at_least(e12 * std::pow(B2.lambda * d2, n - 4.0), c.m, bd);
            Vel W9(2, n);
            W9.dl = {-1.0, -1.0};
            f.add(W8, c2w);
            f.add(W9, c2w * w9);
            parts.push_back({wA3 * c2w * (1.0 - w9), "A3/W8"});
            parts.push_back({wA3 * c2w * w9, "A3/W8+W9"});
        }
        if (c3 > 0) {
            int i = B1.lambda >= B2.lambda ? 0 : 1, j = 1 - i;
            Vel W10 = W7;
            W10.dl[static_cast<size_t>(i)] = -2.0 * c.m;
            W10.dl[static_cast<size_t>(j)] = c.m;
            f.add(W10, c3);
            parts.push_back({wA3 * c3, "A3/W10"});
        }
        v.add(f, wA3);
        parts.push_back({wA3 * c1, "A3/W7"});
    }
    return {v.da, v.dl, dominant(parts), relabeled};
}

FlowVelocity flow_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                        const FlowConstants& c) {
    if (s.bubbles.size() == 1) return y1_field(s, K, cps, c);
    if (s.bubbles.size() == 2) return y2_field(s, K, cps, c);
    throw ValidationError("flows are constructed for one or two bubbles");
}

std::string to_string(FlowTerminal t) {
    switch (t) {
        case FlowTerminal::Cpi: return "cpi";
        case FlowTerminal::Exit: return "exit";
        case FlowTerminal::Budget: return "budget";
    }
    return "";
}

namespace {

Vec pack(const std::vector<Bubble>& b) {
    const long n = b[0].a.size();
    Vec x(static_cast<long>(b.size()) * (n + 1));
    for (size_t i = 0; i < b.size(); ++i) {
        x.segment(static_cast<long>(i) * (n + 1), n) = b[i].a;
        x[static_cast<long>(i) * (n + 1) + n] = std::log(b[i].lambda);
    }
    return x;
}

std::vector<Bubble> unpack(const Vec& x, int p, int n) {
    std::vector<Bubble> b(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
        b[static_cast<size_t>(i)].a = x.segment(i * (n + 1), n);
        b[static_cast<size_t>(i)].lambda = std::exp(x[i * (n + 1) + n]);
    }
    return b;
}

double j_exp_of(const std::vector<Bubble>& b, const KField& K) {
    Configuration cfg{b, balanced_alphas(b, K), PdeltaMode::Asymptotic};
    return j_expansion(cfg, K).J_expansion;
}

// Qualifying critical point within tol of a, or -1.
int cpi_point(const Vec& a, const KField& K, const CriticalPointSearch& cps, double tol) {
    for (size_t i = 0; i < cps.points.size(); ++i) {
        const CriticalPoint& cp = cps.points[i];
        if ((cp.y - a).norm() < tol && cpi_condition(K, cp) > cpi_tolerance(K, cp))
            return static_cast<int>(i);
    }
    return -1;
}

}  // namespace

FlowResult integrate_flow(const FlowState& init, const KField& K, const FlowSpec& spec) {
    return integrate_flow(init, K, find_critical_points(K), spec);
}

FlowResult integrate_flow(const FlowState& init, const KField& K, const CriticalPointSearch& cps,
                          const FlowSpec& spec) {
    const int n = K.dim();
    require_flow_dim(n);
    const int p = static_cast<int>(init.bubbles.size());
    if (p < 1 || p > 2 || init.p != p) throw ValidationError("flow state: p must be 1 or 2 and match the bubbles");
    for (const Bubble& b : init.bubbles)
        if (b.a.size() != n) throw ValidationError("flow state: dimension mismatch with K");
    const FlowConstants& c = spec.constants;
    if (!v_membership(init, c).inside)
        throw ValidationError("flow: initial state outside V(p, eps): " + v_membership(init, c).reason);

    FlowResult res;
    FlowTrace& tr = res.trace;
    std::vector<double> bal = balanced_alphas(init.bubbles, K);
    if (!init.alphas.empty()) {
        double dev = 0.0;
        for (size_t i = 0; i < bal.size() && i < init.alphas.size(); ++i)
            dev = std::max(dev, std::abs(init.alphas[i] - bal[i]));
        if (dev > 1e-12) {
            std::ostringstream os;
            os << "initial weights replaced by balanced ones (max change " << dev << ")";
            tr.events.push_back({init.time, "alpha-slaved", os.str()});
        }
    }

    auto state_of = [&](double t, const Vec& x) {
        FlowState s;
        s.p = p;
        s.bubbles = unpack(x, p, n);
        s.time = t;
        return s;
    };
    OdeField field = [&](double t, const Vec& x) -> Vec {
        // Trial stages far outside the ball are rejected by the step control.
        if (!x.allFinite()) return Vec::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
        FlowState s = state_of(t, x);
        FlowVelocity v = flow_field(s, K, cps, c);
        Vec dx(x.size());
        for (int i = 0; i < p; ++i) {
            dx.segment(i * (n + 1), n) = v.da[static_cast<size_t>(i)];
            dx[i * (n + 1) + n] = v.dlog_lambda[static_cast<size_t>(i)];
        }
        return dx;
    };
    auto is_cpi = [&](const Vec& x) {
        auto b = unpack(x, p, n);
        std::vector<int> ids;
        for (const Bubble& bb : b) {
            if (bb.lambda < c.lambda_cap) return false;
            int id = cpi_point(bb.a, K, cps, c.cpi_tol);
            if (id < 0) return false;
            ids.push_back(id);
        }
        return p == 1 || ids[0] != ids[1];
    };
    std::vector<OdeEvent> events = {
        [&](double t, const Vec& x) { return !v_membership(state_of(t, x), c).inside; },
        [&](double, const Vec& x) { return is_cpi(x); },
        [&](double, const Vec& x) {
            for (const Bubble& bb : unpack(x, p, n))
                if (bb.lambda > spec.lambda_escape) return true;
            return false;
        }};

    double prevJ = std::numeric_limits<double>::quiet_NaN();
    std::string prev_regime;
    bool prev_relabel = false;
    OdeObserver obs = [&](double t, const Vec& x) {
        FlowState s = state_of(t, x);
        FlowSample smp;
        smp.t = t;
        smp.bubbles = s.bubbles;
        smp.J = j_exp_of(s.bubbles, K);
        if (p == 2) smp.eps12 = eps(s.bubbles[0], s.bubbles[1]);
        if (v_membership(s, c).inside) {
            FlowVelocity v = flow_field(s, K, cps, c);
            smp.regime = v.regime;
            if (smp.regime != prev_regime)
                tr.events.push_back({t, "regime", (prev_regime.empty() ? "" : prev_regime + " -> ") + smp.regime});
            if (p == 2 && v.relabeled != prev_relabel && !tr.samples.empty())
                tr.events.push_back({t, "relabel", v.relabeled ? "lambda_1 > lambda_2: roles swapped"
                                                               : "lambda_1 <= lambda_2: roles as labeled"});
            prev_regime = smp.regime;
            prev_relabel = v.relabeled;
        }
        if (!std::isnan(prevJ)) {
            double rise = (smp.J - prevJ) / std::abs(prevJ);
            tr.max_energy_rise = std::max(tr.max_energy_rise, rise);
            if (rise > 1e-8) ++tr.energy_violations;
        }
        prevJ = smp.J;
        tr.samples.push_back(std::move(smp));
    };

    Trajectory traj;
    try {
        traj = ode_integrate(field, pack(init.bubbles), events, spec.ode, init.time, obs);
    } catch (const OdeStiffnessError& e) {
        traj = e.partial();
        tr.events.push_back({traj.t.empty() ? init.time : traj.t.back(), "stiffness", e.what()});
    }
    tr.accepted = traj.accepted;
    tr.rejected = traj.rejected;
    const Vec& xf = traj.x.empty() ? pack(init.bubbles) : traj.x.back();
    double tf = traj.t.empty() ? init.time : traj.t.back();
    res.final_state = state_of(tf, xf);
    res.final_state.alphas = balanced_alphas(res.final_state.bubbles, K);
    res.final_J = j_exp_of(res.final_state.bubbles, K);
    if (traj.terminal == OdeTerminal::Event && traj.event_index == 0) {
        res.terminal = FlowTerminal::Exit;
        res.exit_reason = v_membership(res.final_state, c).reason;
        tr.events.push_back({tf, "exit", res.exit_reason});
    } else if (traj.terminal == OdeTerminal::Event && traj.event_index == 1) {
        res.terminal = FlowTerminal::Cpi;
        CpiRecord rec;
        std::vector<double> Ks;
        int index_sum = 0;
        for (const Bubble& b : res.final_state.bubbles) {
            int id = cpi_point(b.a, K, cps, c.cpi_tol);
            const CriticalPoint& cp = cps.points[static_cast<size_t>(id)];
            rec.points.push_back(cp.y);
            rec.point_ids.push_back(id);
            rec.conditions.push_back(cpi_condition(K, cp));
            Ks.push_back(cp.K_value);
            index_sum += cp.morse_index;
        }
        if (p == 1) {
            rec.level = single_level(n, Ks[0]);
            rec.morse_index_at_infinity = n - index_sum;
        } else {
            rec.level = pair_level(n, Ks[0], Ks[1]);
            rec.morse_index_at_infinity = 2 * n - index_sum + 1;
        }
        res.cpi = rec;
        std::ostringstream os;
        os << "points";
        for (int id : rec.point_ids) os << " y" << id;
        os << ", level " << rec.level << ", index " << rec.morse_index_at_infinity;
        tr.events.push_back({tf, "cpi", os.str()});
    } else {
        res.terminal = FlowTerminal::Budget;
        tr.events.push_back({tf, "budget", traj.event_index == 2 ? "lambda escaped without a critical point at infinity"
                                                                 : "time or step budget exhausted"});
    }
    return res;
}

double psi_normal_form(const Vec& a, double lambda, const Vec& y, const KField& K, double c_eff) {
    const int n = K.dim();
    double Ky = K.value(y);
    return std::pow(S_n(n), 4.0 / n) * std::pow(K.value(a), -(n - 4.0) / n) *
           (1.0 - c_eff / (lambda * lambda) * K.laplacian(y) / std::pow(Ky, n / 4.0));
}

PsiFit fit_psi_constant(const Vec& y, const KField& K, const std::vector<double>& lambdas,
                        PdeltaMode mode, const EnergySpec& spec) {
    const int n = K.dim();
    double Ky = K.value(y), lap = K.laplacian(y);
    if (!(std::abs(lap) > 0)) throw ValidationError("fit_psi_constant: Laplacian of K vanishes at y");
    double level = single_level(n, Ky);
    PsiFit f;
    for (double lam : lambdas) {
        Configuration cfg{{{y, lam}}, {1.0}, mode};
        double J = j_quadrature(cfg, K, spec);
        f.lambdas.push_back(lam);
        f.values.push_back((1.0 - J / level) * lam * lam * std::pow(Ky, n / 4.0) / lap);
    }
    double s = 0.0, lo = f.values[0], hi = f.values[0];
    for (double v : f.values) s += v, lo = std::min(lo, v), hi = std::max(hi, v);
    f.c_eff = s / static_cast<double>(f.values.size());
    f.spread = (hi - lo) / std::abs(f.c_eff);
    return f;
}

FlowState f_lambda_initial(double alpha, const Vec& y0, const Vec& x, double lambda, const KField& K) {
    const int n = K.dim();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("f_lambda_initial: alpha must lie in [0,1]");
    if (!(lambda > 0)) throw ValidationError("f_lambda_initial: lambda must be positive");
    FlowState s;
    auto w = [&](double t, const Vec& p) { return t / std::pow(K.value(p), (n - 4.0) / 8.0); };
    if (alpha == 1.0 || alpha == 0.0) {
        const Vec& p = alpha == 1.0 ? y0 : x;
        s.p = 1;
        s.bubbles = {{p, lambda}};
        s.alphas = {1.0};
    } else {
        if ((x - y0).norm() == 0.0) throw ValidationError("f_lambda_initial: x must differ from y0");
        s.p = 2;
        s.bubbles = {{y0, lambda}, {x, lambda}};
        s.alphas = {w(alpha, y0), w(1.0 - alpha, x)};
    }
    Configuration cfg{s.bubbles, s.alphas, PdeltaMode::Asymptotic};
    double norm = std::sqrt(config_norm2_expansion(cfg));
    for (double& a : s.alphas) a /= norm;
    return s;
}

IntersectionEstimate estimate_intersection_number(const Vec& y0, const Vec& yi,
                                                  const std::vector<Vec>& x_samples,
                                                  const std::vector<double>& alphas, double lambda,
                                                  const KField& K, const FlowSpec& spec) {
    if (x_samples.empty() || alphas.empty()) throw ValidationError("intersection estimate needs samples");
    CriticalPointSearch cps = find_critical_points(K);
    IntersectionEstimate est;
    auto run = [&](const std::vector<double>& grid, bool count_all) {
        int hits = 0;
        for (const Vec& x : x_samples)
            for (double al : grid) {
                FlowState s = f_lambda_initial(al, y0, x, lambda, K);
                if (count_all) ++est.samples;
                FlowResult r;
                try {
                    if (!v_membership(s, spec.constants).inside) {
                        if (count_all) ++est.exits;
                        continue;
                    }
                    r = integrate_flow(s, K, cps, spec);
                } catch (const NumericalError&) {
                    if (count_all) ++est.unresolved;
                    continue;
                }
                if (r.terminal == FlowTerminal::Cpi) {
                    bool hit = r.cpi->points.size() == 2 &&
                               (((r.cpi->points[0] - y0).norm() < 1e-6 && (r.cpi->points[1] - yi).norm() < 1e-6) ||
                                ((r.cpi->points[1] - y0).norm() < 1e-6 && (r.cpi->points[0] - yi).norm() < 1e-6));
                    if (hit)
                        ++hits;
                    else if (count_all)
                        ++est.other_cpi;
                } else if (count_all) {
                    (r.terminal == FlowTerminal::Exit ? est.exits : est.unresolved)++;
                }
            }
        return hits;
    };
    est.hits = run(alphas, true);
    est.parity = est.hits % 2;
    // Refinement: midpoints added to the alpha grid.
    std::vector<double> fine = alphas;
    std::vector<double> sorted = alphas;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i + 1 < sorted.size(); ++i) fine.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    est.refined_hits = run(fine, false);
    est.refined_parity = est.refined_hits % 2;
    est.stable = est.parity == est.refined_parity;
    return est;
}

double pairing_along_field(const FlowState& s, const KField& K, const CriticalPointSearch& cps,
                           const FlowConstants& c, const EnergySpec& spec, double h) {
    FlowVelocity v = flow_field(s, K, cps, c);
    Configuration cfg{s.bubbles, balanced_alphas(s.bubbles, K), PdeltaMode::Asymptotic};
    auto pb = project(cfg, spec.projection);
    double norm = std::sqrt(config_norm2(cfg, pb, spec.quad));
    // Scale the step so each parameter moves by at most h.
    double vmax = 0.0;
    for (size_t i = 0; i < cfg.bubbles.size(); ++i) {
        double ahat = cfg.alphas[i] / norm;
        vmax = std::max(vmax, (v.da[i].norm() * cfg.bubbles[i].lambda + std::abs(v.dlog_lambda[i])) / ahat);
    }
    if (!(vmax > 0.0)) return 0.0;
    const double step = h / vmax;
    auto J_at = [&](double t) {
        Configuration x = cfg;
        for (size_t i = 0; i < x.bubbles.size(); ++i) {
            double ahat = cfg.alphas[i] / norm;
            x.bubbles[i].a += (t / ahat) * v.da[i];
            x.bubbles[i].lambda *= std::exp((t / ahat) * v.dlog_lambda[i]);
        }
        return j_quadrature(x, K, spec);
    };
    return -(J_at(step) - J_at(-step)) / (2.0 * step);
}

double lower_bound_expression(const FlowState& s, const KField& K) {
    const int n = K.dim();
    double b = 0.0;
    for (const Bubble& x : s.bubbles) {
        double d = boundary_distance(x.a);
        b += 1.0 / (x.lambda * x.lambda) + K.grad(x.a).norm() / x.lambda + std::pow(x.lambda * d, 3.0 - n);
    }
    if (s.bubbles.size() == 2) b += std::pow(eps(s.bubbles[0], s.bubbles[1]), (n - 3.0) / (n - 4.0));
    return b;
}

LowerBoundFit fit_lower_bound(const std::vector<double>& pairings, const std::vector<double>& bounds) {
    if (pairings.size() != bounds.size() || pairings.empty())
        throw ValidationError("fit_lower_bound: need matching nonempty samples");
    std::vector<double> r;
    for (size_t i = 0; i < pairings.size(); ++i) r.push_back(pairings[i] / bounds[i]);
    std::vector<double> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    LowerBoundFit f;
    f.samples = static_cast<int>(r.size());
    f.min_ratio = sorted.front();
    f.c = sorted[static_cast<size_t>(0.05 * static_cast<double>(sorted.size() - 1))];
    for (double x : r)
        if (x < 0.5 * f.c) ++f.violations_half_c;
    return f;
}

}  // namespace bilap

#include "bilap/numerics/ball_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "bilap/errors.hpp"
#include "bilap/numerics/gauss_legendre.hpp"
#include "bilap/numerics/radial_quadrature.hpp"
#include "bilap/numerics/summation.hpp"

namespace bilap {

std::vector<Vec> span_basis(const std::vector<Vec>& vectors, double tol) {
    std::vector<Vec> basis;
    for (const Vec& v : vectors) {
        double scale = v.norm();
        if (scale <= tol) continue;
        Vec w = v / scale;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) w -= w.dot(b) * b;
        double nw = w.norm();
        if (nw > 1e-9) basis.push_back(w / nw);
    }
    return basis;
}

namespace {

struct AngularRule {
    std::vector<Vec> dirs;
    std::vector<double> weights;
};

Vec complement_unit(const std::vector<Vec>& basis, int n) {
    for (int attempt = 0; attempt < n; ++attempt) {
        // Prefer coordinate axes least aligned with the basis.
        int best = 0;
        double best_proj = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            double proj = 0.0;
            for (const Vec& b : basis) proj += b[i] * b[i];
            if (proj < best_proj - 1e-14) best_proj = proj, best = i;
        }
        Vec e = Vec::Zero(n);
        e[best] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) e -= e.dot(b) * b;
        if (e.norm() > 1e-6) return e / e.norm();
    }
    throw ValidationError("integrate_ball: no complement direction");
}

AngularRule make_angular_rule(int n, const std::vector<Vec>& basis, int m) {
    const int k = static_cast<int>(basis.size());
    AngularRule rule;
    Vec eperp = complement_unit(basis, n);
    double tail_area = unit_sphere_area(n - k);
    if (k == 0) {
        rule.dirs.push_back(eperp);
        rule.weights.push_back(tail_area);
        return rule;
    }
    const GaussRule& g = gauss_legendre(m);
    std::vector<double> ang(m), cw(m);
    for (int i = 0; i < m; ++i) {
        ang[i] = 0.5 * std::numbers::pi * (1.0 + g.nodes[i]);
        cw[i] = 0.5 * std::numbers::pi * g.weights[i];
    }
    std::vector<int> idx(k, 0);
    long total = 1;
    for (int j = 0; j < k; ++j) total *= m;
    rule.dirs.reserve(total);
    rule.weights.reserve(total);
    for (long t = 0; t < total; ++t) {
        long r = t;
        for (int j = k - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(r % m);
            r /= m;
        }
        Vec w = Vec::Zero(n);
        double rem = 1.0, weight = tail_area;
        for (int j = 0; j < k; ++j) {
            double a = ang[idx[j]];
            double s = std::sin(a);
            w += rem * std::cos(a) * basis[j];
            weight *= cw[idx[j]] * std::pow(s, n - 2 - j);
            rem *= s;
        }
        w += rem * eperp;
        rule.dirs.push_back(w);
        rule.weights.push_back(weight);
    }
    return rule;
}

int partition_power(int n) { return 2 * ((n + 4) / 2); }

struct Panels {
    std::vector<double> s, w;
};

void add_panels(Panels& out, double s0, double s1, double width, int m) {
    if (!(s1 > s0)) return;
    int count = std::max(1, static_cast<int>(std::ceil((s1 - s0) / width - 1e-9)));
    double h = (s1 - s0) / count;
    const GaussRule& g = gauss_legendre(m);
    for (int p = 0; p < count; ++p) {
        double a = s0 + p * h, mid = a + 0.5 * h;
        for (int i = 0; i < m; ++i) {
            out.s.push_back(mid + 0.5 * h * g.nodes[i]);
            out.w.push_back(0.5 * h * g.weights[i]);
        }
    }
}

std::vector<double> run_rule(const BallIntegrand& in, const std::vector<Vec>& basis,
                             int radial_nodes, int angular_nodes, double panel_width,
                             long& evaluations) {
    const int n = in.n, nc = static_cast<int>(in.components);
    const double cpow = in.center_power > 0 ? in.center_power : n;
    const double dpow = in.decay_power > 0 ? in.decay_power : n;
    const int mpart = partition_power(n);
    AngularRule ang = make_angular_rule(n, basis, angular_nodes);

    std::vector<CompensatedSum> acc(nc);
    std::vector<double> vals(nc);
    Vec y(n);
    const size_t ncent = in.centers.size();
    std::vector<double> logs(ncent);

    for (size_t c = 0; c < ncent; ++c) {
        const Vec& a = in.centers[c].a;
        const double lam = in.centers[c].lambda;
        const double a2 = a.squaredNorm();
        for (size_t d = 0; d < ang.dirs.size(); ++d) {
            const Vec& om = ang.dirs[d];
            double ad = a.dot(om);
            double rb = -ad + std::sqrt(std::max(0.0, ad * ad + 1.0 - a2));
            double sb = std::log(lam * rb);
            double slo = in.excluded_radius > 0 ? std::log(lam * in.excluded_radius)
                                                 : -36.0 / cpow;
            Panels pan;
            if (in.domain != Domain::Exterior)
                add_panels(pan, slo, sb, panel_width, radial_nodes);
            if (in.domain != Domain::Ball)
                add_panels(pan, std::max(sb, slo), std::max(sb, 0.0) + 36.0 / dpow,
                           panel_width, radial_nodes);
            for (size_t i = 0; i < pan.s.size(); ++i) {
                double rho = std::exp(pan.s[i]) / lam;
                y = a + rho * om;
                double pw = 1.0;
                if (ncent > 1) {
                    double lmax = -std::numeric_limits<double>::infinity();
                    bool at_other = false;
                    for (size_t j = 0; j < ncent; ++j) {
                        double dist = (j == c) ? rho : (y - in.centers[j].a).norm();
                        if (dist == 0.0) {
                            at_other = true;
                            break;
                        }
                        const Center& cj = in.centers[j];
                        double sc = cj.partition_scale > 0 ? cj.partition_scale : cj.lambda;
                        logs[j] = -mpart * std::log(sc * dist);
                        lmax = std::max(lmax, logs[j]);
                    }
                    if (at_other) continue;
                    double den = 0.0;
                    for (size_t j = 0; j < ncent; ++j) den += std::exp(logs[j] - lmax);
                    pw = std::exp(logs[c] - lmax) / den;
                    if (pw < 1e-300) continue;
                }
                double wt = ang.weights[d] * pan.w[i] * std::pow(rho, n) * pw;
                in.f(y, vals.data());
                ++evaluations;
                for (int k = 0; k < nc; ++k) acc[k].add(wt * vals[k]);
            }
        }
    }
    std::vector<double> out(nc);
    for (int k = 0; k < nc; ++k) out[k] = acc[k].value();
    return out;
}

}  // namespace

QuadResult integrate_ball(const BallIntegrand& in, const QuadratureSpec& spec) {
    if (in.n < 2) throw ValidationError("integrate_ball: dimension too small");
    if (in.centers.empty()) throw ValidationError("integrate_ball: no centers");
    if (spec.radial_nodes < 1 || spec.angular_nodes < 1 || !(spec.rel_tol > 0))
        throw ValidationError("integrate_ball: invalid quadrature spec");
    if (in.excluded_radius > 0 && in.centers.size() != 1)
        throw ValidationError("integrate_ball: excluded radius needs a single center");
    for (const Center& c : in.centers)
        if (c.a.size() != in.n || c.a.norm() >= 1.0 || !(c.lambda > 0))
            throw ValidationError("integrate_ball: center outside the ball");

    std::vector<Vec> span_in;
    for (const Center& c : in.centers) span_in.push_back(c.a);
    for (const Vec& v : in.directions) span_in.push_back(v);
    std::vector<Vec> basis = span_basis(span_in);
    if (static_cast<int>(basis.size()) > in.n - 1)
        throw ValidationError("integrate_ball: symmetry span too large for dimension");

    QuadResult res;
    int nr = spec.radial_nodes, na = spec.angular_nodes;
    std::vector<double> prev = run_rule(in, basis, nr, na, spec.panel_width, res.evaluations);
    if (!spec.estimate_error) {
        res.value = prev;
        res.error.assign(prev.size(), std::numeric_limits<double>::quiet_NaN());
        return res;
    }
    for (int level = 0; level <= spec.max_refinements; ++level) {
        nr = nr + std::max(2, nr / 2);
        na = na + std::max(2, na / 2);
        std::vector<double> cur = run_rule(in, basis, nr, na, spec.panel_width, res.evaluations);
        double scale = 0.0, worst = 0.0;
        std::vector<double> err(cur.size());
        for (size_t k = 0; k < cur.size(); ++k) {
            err[k] = std::fabs(cur[k] - prev[k]);
            scale = std::max(scale, std::fabs(cur[k]));
            worst = std::max(worst, err[k]);
        }
        res.value = cur;
        res.error = err;
        if (worst <= std::max(spec.rel_tol * scale, spec.abs_tol)) return res;
        prev = cur;
    }
    double worst = *std::max_element(res.error.begin(), res.error.end());
    char tol[32];
    std::snprintf(tol, sizeof tol, "%g", spec.rel_tol);
    throw QuadratureError(std::string("integrate_ball: tolerance ") + tol + " not reached",
                          res.value.empty() ? NAN : res.value[0], worst);
}

double integrate_ball(const std::function<double(const Vec&)>& f, int n,
                      const std::vector<Center>& centers, const QuadratureSpec& spec,
                      const std::vector<Vec>& directions) {
    BallIntegrand in;
    in.n = n;
    in.centers = centers;
    in.directions = directions;
    in.f = [&f](const Vec& y, double* out) { out[0] = f(y); };
    return integrate_ball(in, spec).value[0];
}

}  // namespace bilap

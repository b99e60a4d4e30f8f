#include "bilap/morse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/green.hpp"
#include "bilap/numerics/ode.hpp"

namespace bilap {

namespace {

std::string fmt_point(const Vec& y) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (int i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << ")";
    return os.str();
}

// Newton on grad K in the coordinates x = B c; returns false on failure.
bool newton(const KField& K, const Mat& B, Vec& x) {
    for (int it = 0; it < 200; ++it) {
        Vec g = K.grad(x);
        if (g.norm() < 1e-13 * std::max(1.0, std::abs(K.value(x)))) return true;
        if (B.cols() == 0) return g.norm() < 1e-10;
        Vec gc = B.transpose() * g;
        Mat Hc = B.transpose() * K.hessian(x) * B;
        Eigen::ColPivHouseholderQR<Mat> qr(Hc);
        Vec step = qr.rank() == Hc.cols() ? Vec(-qr.solve(gc)) : Vec(-gc);
        double s = step.norm();
        if (!std::isfinite(s)) return false;
        if (s > 0.2) step *= 0.2 / s;
        x += B * step;
        if (x.norm() > 0.999) return false;
        if (s < 1e-15) break;
    }
    return K.grad(x).norm() < 1e-10;
}

CriticalPoint classify(const KField& K, const Vec& y) {
    CriticalPoint c;
    c.y = y;
    c.K_value = K.value(y);
    c.grad_norm = K.grad(y).norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(K.hessian(y));
    c.eigenvalues = es.eigenvalues();
    c.laplacian_K = K.laplacian(y);
    double scale = std::max(1.0, c.eigenvalues.cwiseAbs().maxCoeff());
    c.degenerate = c.eigenvalues.cwiseAbs().minCoeff() < 1e-6 * scale;
    c.morse_index = static_cast<int>((c.eigenvalues.array() < 0.0).count());
    if (K.dim() == 6) c.robin_value = robin(y);
    return c;
}

bool by_height(const CriticalPoint& a, const CriticalPoint& b) {
    if (a.K_value != b.K_value) return a.K_value > b.K_value;
    return std::lexicographical_compare(a.y.data(), a.y.data() + a.y.size(), b.y.data(),
                                        b.y.data() + b.y.size());
}

}  // namespace

CriticalPointSearch find_critical_points(const KField& K, int seeds_per_axis) {
    if (seeds_per_axis < 2) throw ValidationError("find_critical_points: need at least 2 seeds per axis");
    const int n = K.dim();
    const auto& dirs = K.symmetry_directions();
    const int k = static_cast<int>(dirs.size());
    Mat B(n, k);
    for (int j = 0; j < k; ++j) B.col(j) = dirs[j];

    CriticalPointSearch out;
    std::vector<CriticalPoint> all;
    std::vector<int> idx(static_cast<size_t>(k), 0);
    while (true) {
        Vec c(k);
        for (int j = 0; j < k; ++j) c[j] = -0.95 + 1.9 * idx[static_cast<size_t>(j)] / (seeds_per_axis - 1);
        if (c.norm() < 0.97) {
            ++out.seeds;
            Vec x = B * c;
            if (newton(K, B, x)) {
                ++out.converged;
                bool dup = false;
                for (const CriticalPoint& p : all)
                    if ((p.y - x).norm() < 1e-6) dup = true;
                if (!dup) all.push_back(classify(K, x));
            }
        }
        int j = 0;
        while (j < k && ++idx[static_cast<size_t>(j)] == seeds_per_axis) idx[static_cast<size_t>(j++)] = 0;
        if (j == k) break;
    }
    for (CriticalPoint& p : all) (p.degenerate ? out.degenerate : out.points).push_back(p);
    std::sort(out.points.begin(), out.points.end(), by_height);
    std::sort(out.degenerate.begin(), out.degenerate.end(), by_height);
    out.empty = out.points.empty() && out.degenerate.empty();
    return out;
}

double cpi_condition(const KField& K, const CriticalPoint& c) {
    if (K.dim() == 6) return -c.laplacian_K / (60.0 * c.K_value) + robin(c.y);
    return -c.laplacian_K;
}

double cpi_tolerance(const KField&, const CriticalPoint& c) {
    return 1e-8 * std::max(1.0, std::abs(c.K_value));
}

double single_level(int n, double K_y) {
    return std::pow(S_n(n), 4.0 / n) * std::pow(K_y, -(n - 4.0) / n);
}

double pair_level(int n, double K_i, double K_j) {
    double s = std::pow(K_i, (4.0 - n) / 4.0) + std::pow(K_j, (4.0 - n) / 4.0);
    return std::pow(S_n(n), 4.0 / n) * std::pow(s, 4.0 / n);
}

CpiEnumeration enumerate_cpi_single(const KField& K, const CriticalPointSearch& cps) {
    const int n = K.dim();
    if (n < 6) throw ValidationError("critical points at infinity are classified for n >= 6");
    CpiEnumeration e;
    for (size_t i = 0; i < cps.points.size(); ++i) {
        const CriticalPoint& c = cps.points[i];
        double cond = cpi_condition(K, c);
        int id = static_cast<int>(i);
        if (std::abs(cond) <= cpi_tolerance(K, c)) {
            e.indeterminate.push_back(id);
        } else if (cond > 0) {
            e.records.push_back({{c.y}, {id}, single_level(n, c.K_value), n - c.morse_index, {cond}});
        } else {
            e.excluded.push_back(id);
        }
    }
    return e;
}

CpiEnumeration enumerate_cpi_pairs(const KField& K, const CriticalPointSearch& cps) {
    const int n = K.dim();
    if (n < 7) throw ValidationError("two-mass critical points at infinity are classified for n >= 7");
    CpiEnumeration single = enumerate_cpi_single(K, cps);
    CpiEnumeration e;
    e.excluded = single.excluded;
    e.indeterminate = single.indeterminate;
    const auto& r = single.records;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = i + 1; j < r.size(); ++j) {
            const CriticalPoint& a = cps.points[static_cast<size_t>(r[i].point_ids[0])];
            const CriticalPoint& b = cps.points[static_cast<size_t>(r[j].point_ids[0])];
            e.records.push_back({{a.y, b.y},
                                 {r[i].point_ids[0], r[j].point_ids[0]},
                                 pair_level(n, a.K_value, b.K_value),
                                 2 * n - a.morse_index - b.morse_index + 1,
                                 {r[i].conditions[0], r[j].conditions[0]}});
        }
    return e;
}

const AssumptionResult& AssumptionReport::get(const std::string& name) const {
    for (const AssumptionResult& r : results)
        if (r.name == name) return r;
    throw ValidationError("no assumption named " + name);
}

namespace {

AssumptionResult check_a0(const KField& K, const AssumptionOptions& opt, double& min_K) {
    const int n = K.dim();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    AssumptionResult r{"A0", "pass", "", {}};
    double worst = -std::numeric_limits<double>::infinity();
    Vec worst_x;
    min_K = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opt.boundary_samples; ++s) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = gauss(rng);
        x /= x.norm();
        double dn = K.grad(x).dot(x);
        if (dn > worst) worst = dn, worst_x = x;
        min_K = std::min(min_K, K.value(x));
        Vec z = x * std::pow(unif(rng), 1.0 / n);
        min_K = std::min(min_K, K.value(z));
    }
    std::ostringstream os;
    os << "max over " << opt.boundary_samples << " boundary samples of dK/dnu = " << worst;
    r.detail = os.str();
    r.witnesses.push_back("x = " + fmt_point(worst_x));
    if (!(worst < 0)) r.status = "fail";
    if (!(min_K > 0)) {
        r.status = "fail";
        r.witnesses.push_back("K not positive on the sampled closure: min K = " + std::to_string(min_K));
    }
    return r;
}

// Descending flow of K from y along an unstable direction; returns the id of
// the critical point reached, -1 for exit or no convergence.
int shoot(const KField& K, const CriticalPointSearch& cps, const Vec& start) {
    OdeSpec spec;
    spec.t_max = 1e4;
    spec.max_steps = 20000;
    spec.initial_step = 1e-2;
    OdeField f = [&](double, const Vec& x) -> Vec { return -K.grad(x); };
    std::vector<OdeEvent> ev = {[](double, const Vec& x) { return x.norm() >= 0.999; },
                                [&](double, const Vec& x) { return K.grad(x).norm() < 1e-7; }};
    Trajectory tr;
    try {
        tr = ode_integrate(f, start, ev, spec);
    } catch (const NumericalError&) {
        return -1;
    }
    if (tr.terminal != OdeTerminal::Event || tr.event_index != 1) return -1;
    Vec x = tr.x.back();
    Mat B = Mat::Identity(K.dim(), K.dim());
    if (!newton(K, B, x)) return -1;
    for (size_t i = 0; i < cps.points.size(); ++i)
        if ((cps.points[i].y - x).norm() < 1e-5) return static_cast<int>(i);
    return -1;
}

}  // namespace

AssumptionReport check_assumptions(const KField& K, const AssumptionOptions& opt) {
    const int n = K.dim();
    AssumptionReport rep;
    rep.n = n;
    rep.search = find_critical_points(K);
    const auto& pts = rep.search.points;

    rep.results.push_back(check_a0(K, opt, rep.min_K_sampled));

    {
        AssumptionResult r{"A1", "pass", "", {}};
        std::ostringstream os;
        os << pts.size() << " nondegenerate critical points, " << rep.search.degenerate.size()
           << " degenerate";
        r.detail = os.str();
        for (const CriticalPoint& c : rep.search.degenerate) {
            r.status = "fail";
            r.witnesses.push_back("degenerate at " + fmt_point(c.y) +
                                  ", min |eigenvalue| = " +
                                  std::to_string(c.eigenvalues.cwiseAbs().minCoeff()));
        }
        if (rep.search.empty) {
            r.status = "fail";
            r.witnesses.push_back("no critical points found");
        }
        rep.results.push_back(r);
    }

    // Signs in order of decreasing K.
    std::vector<double> cond(pts.size());
    std::vector<int> sign(pts.size());
    bool undecided = false;
    for (size_t i = 0; i < pts.size(); ++i) {
        cond[i] = cpi_condition(K, pts[i]);
        sign[i] = std::abs(cond[i]) <= cpi_tolerance(K, pts[i]) ? 0 : (cond[i] > 0 ? 1 : -1);
        if (sign[i] == 0) undecided = true;
    }
    auto point_line = [&](size_t i) {
        std::ostringstream os;
        os << "y" << i << " = " << fmt_point(pts[i].y) << ": K = " << pts[i].K_value
           << ", index = " << pts[i].morse_index << ", condition = " << cond[i];
        return os.str();
    };
    const bool degenerate = !rep.search.degenerate.empty();
    {
        AssumptionResult r{"A2", "pass", "", {}};
        // l = number of leading points with positive sign; all later ones negative,
        // and K strictly drops between y_l and y_{l+1}.
        size_t l = 0;
        while (l < pts.size() && sign[l] > 0) ++l;
        bool ok = !undecided && !degenerate;
        for (size_t i = l; i < pts.size(); ++i) ok = ok && sign[i] < 0;
        if (l > 0 && l < pts.size() && !(pts[l - 1].K_value > pts[l].K_value)) ok = false;
        r.detail = (n == 6 ? "-Laplacian K/(60K) + H(y,y)" : std::string("-Laplacian K")) +
                   " positive exactly on the l highest critical points; l = " + std::to_string(l);
        for (size_t i = 0; i < pts.size(); ++i) r.witnesses.push_back(point_line(i));
        if (!ok) r.status = "fail";
        rep.results.push_back(r);
    }
    {
        AssumptionResult r{"A2'", "pass", "", {}};
        // l is the position of the last positive point; below it only negative
        // signs; positive-K points above it with nonpositive sign need
        // index <= n-2 (the lower bound involves m from A3, not checked).
        size_t l = 0;
        for (size_t i = 0; i < pts.size(); ++i)
            if (sign[i] > 0) l = i + 1;
        bool ok = !degenerate;
        bool partial = false;
        for (size_t i = 0; i < l; ++i)
            if (sign[i] <= 0) {
                if (pts[i].morse_index > n - 2) {
                    ok = false;
                    r.witnesses.push_back("index too large: " + point_line(i));
                } else {
                    partial = true;
                    r.witnesses.push_back("lower index bound needs m from A3: " + point_line(i));
                }
            }
        for (size_t i = l; i < pts.size(); ++i)
            if (sign[i] == 0) {
                ok = false;
                r.witnesses.push_back("indeterminate sign: " + point_line(i));
            }
        if (l > 0 && l < pts.size() && !(pts[l - 1].K_value > pts[l].K_value)) ok = false;
        r.detail = "l = " + std::to_string(l);
        r.status = !ok ? "fail" : (partial ? "partial" : "pass");
        rep.results.push_back(r);
    }
    rep.results.push_back({"A3", "not checked", "homology of X is out of scope", {}});
    rep.results.push_back({"A4", "not checked", "homology of X is out of scope", {}});
    {
        AssumptionResult r{"A5", "pass", "", {}};
        bool ok = !degenerate && !undecided;
        if (!ok) r.witnesses.push_back("degenerate critical point or vanishing Laplacian");
        for (size_t i = 0; i < pts.size(); ++i)
            if (!(std::abs(pts[i].laplacian_K) > cpi_tolerance(K, pts[i]))) {
                ok = false;
                r.witnesses.push_back("Laplacian K vanishes: " + point_line(i));
            }
        // W_s(y_i) meets W_u(y_j) only through a descending orbit from y_j to y_i.
        int certified = 0, shot = 0;
        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> gauss;
        for (size_t j = 0; j < pts.size(); ++j) {
            if (pts[j].laplacian_K <= 0) continue;  // need -Laplacian K(y_j) < 0
            bool needs_shot = false;
            for (size_t i = 0; i < pts.size(); ++i)
                if (pts[i].laplacian_K < 0) {
                    if (pts[i].K_value >= pts[j].K_value)
                        ++certified;
                    else
                        needs_shot = true;
                }
            if (!needs_shot || pts[j].morse_index == 0) continue;
            Eigen::SelfAdjointEigenSolver<Mat> es(K.hessian(pts[j].y));
            Mat U = es.eigenvectors().leftCols(pts[j].morse_index);
            std::vector<Vec> dirs;
            for (int c = 0; c < U.cols(); ++c) dirs.push_back(U.col(c)), dirs.push_back(-U.col(c));
            for (int s = 0; s < opt.shooting_directions && U.cols() > 1; ++s) {
                Vec w(U.cols());
                for (int c = 0; c < w.size(); ++c) w[c] = gauss(rng);
                dirs.push_back(U * w.normalized());
            }
            for (const Vec& v : dirs) {
                ++shot;
                int hit = shoot(K, rep.search, pts[j].y + 1e-3 * v);
                if (hit >= 0 && pts[static_cast<size_t>(hit)].laplacian_K < 0) {
                    ok = false;
                    r.witnesses.push_back("descending orbit from y" + std::to_string(j) + " reaches y" +
                                          std::to_string(hit));
                }
            }
        }
        std::ostringstream os;
        os << certified << " pairs excluded by K-level ordering, " << shot
           << " shooting orbits along unstable directions";
        r.detail = os.str();
        r.status = !ok ? "fail" : (shot > 0 ? "partial" : "pass");
        rep.results.push_back(r);
    }
    rep.results.push_back({"A6", "not checked", "boundarylessness of X is out of scope", {}});
    {
        AssumptionResult r{"A7", "pass", "", {}};
        // y0 = absolute maximum; every other critical point with -Laplacian K > 0
        // is tested, with k = n - index - 1 recorded.
        size_t y0 = 0;
        bool found = false;
        for (size_t i = 0; i < pts.size(); ++i)
            if (pts[i].morse_index == n) {
                y0 = i;
                found = true;
                break;
            }
        if (!found) {
            r.status = "fail";
            r.detail = "no nondegenerate maximum found";
        } else {
            double lhs = 2.0 / std::pow(pts[y0].K_value, (n - 4.0) / 4.0);
            int count = 0;
            for (size_t i = 0; i < pts.size(); ++i) {
                if (i == y0 || !(pts[i].laplacian_K < 0)) continue;
                ++count;
                double rhs = 1.0 / std::pow(pts[i].K_value, (n - 4.0) / 4.0);
                std::ostringstream os;
                os << "y" << i << " (index " << pts[i].morse_index << ", k = "
                   << n - pts[i].morse_index - 1 << "): 2/K(y0)^((n-4)/4) = " << lhs
                   << (lhs < rhs ? " < " : " >= ") << "1/K(y)^((n-4)/4) = " << rhs;
                r.witnesses.push_back(os.str());
                if (!(lhs < rhs)) r.status = "fail";
            }
            r.detail = std::to_string(count) + " inequality instances against y0 = " + fmt_point(pts[y0].y);
        }
        rep.results.push_back(r);
    }
    for (size_t i = 0; i < pts.size(); ++i)
        rep.manifolds.push_back({static_cast<int>(i), n - pts[i].morse_index, pts[i].morse_index});
    return rep;
}

}  // namespace bilap

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/projection.hpp"

namespace bilap {

namespace {

// Cubic Lagrange stencil around t on ascending nodes; with `mirror` the
// function is taken even in its coordinate (nodes reflected through 0).
void stencil(const std::vector<double>& nodes, double t, bool mirror, double coord[4], int idx[4]) {
    std::vector<std::pair<double, int>> ext;
    if (mirror)
        for (int j = static_cast<int>(nodes.size()) - 1; j >= 0; --j)
            if (nodes[j] > 0) ext.push_back({-nodes[j], j});
    for (int j = 0; j < static_cast<int>(nodes.size()); ++j) ext.push_back({nodes[j], j});
    int m = static_cast<int>(ext.size());
    auto it = std::upper_bound(ext.begin(), ext.end(), t,
                               [](double v, const std::pair<double, int>& e) { return v < e.first; });
    int hi = static_cast<int>(it - ext.begin());
    int start = std::clamp(hi - 2, 0, std::max(0, m - 4));
    for (int k = 0; k < 4; ++k) {
        int e = std::min(start + k, m - 1);
        coord[k] = ext[e].first;
        idx[k] = ext[e].second;
    }
}

void lagrange(const double c[4], double t, double w[4]) {
    for (int i = 0; i < 4; ++i) {
        w[i] = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) w[i] *= (t - c[j]) / (c[i] - c[j]);
    }
}

}  // namespace

double AxisymmetricGrid::interpolate(const Vec& y) const {
    double zc = y.dot(axis);
    double rc = (y - zc * axis).norm();
    zc = std::clamp(zc, z.front(), z.back());
    rc = std::min(rc, r.back());
    double cz[4], cr[4], wz[4], wr[4];
    int iz[4], ir[4];
    stencil(z, zc, false, cz, iz);
    stencil(r, rc, true, cr, ir);
    lagrange(cz, zc, wz);
    lagrange(cr, rc, wr);
    const size_t nr = r.size();
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += wz[i] * wr[j] * values[iz[i] * nr + ir[j]];
    return s;
}

AxisymmetricGrid read_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("read_grid: cannot open " + path);
    std::stringstream body;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') body << line << '\n';
    AxisymmetricGrid g;
    std::string tag;
    size_t nz = 0, nr = 0;
    if (!(body >> tag >> g.n >> nz >> nr) || tag != "axisymmetric-grid")
        throw ValidationError("read_grid: bad header in " + path);
    require_dimension(g.n);
    if (nz < 4 || nr < 2) throw ValidationError("read_grid: grid too small");
    g.axis.resize(g.n);
    for (int i = 0; i < g.n; ++i) body >> g.axis[i];
    g.z.resize(nz);
    g.r.resize(nr);
    for (auto& v : g.z) body >> v;
    for (auto& v : g.r) body >> v;
    g.values.resize(nz * nr);
    for (auto& v : g.values) body >> v;
    if (!body) throw ValidationError("read_grid: truncated data in " + path);
    if (!(g.axis.norm() > 0)) throw ValidationError("read_grid: zero axis");
    g.axis /= g.axis.norm();
    if (!std::is_sorted(g.z.begin(), g.z.end()) || !std::is_sorted(g.r.begin(), g.r.end()) ||
        g.r.front() < 0)
        throw ValidationError("read_grid: node coordinates must ascend, r >= 0");
    return g;
}

void write_grid(const AxisymmetricGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("write_grid: cannot open " + path);
    out.precision(17);
    out << "axisymmetric-grid " << g.n << ' ' << g.z.size() << ' ' << g.r.size() << '\n';
    for (int i = 0; i < g.n; ++i) out << g.axis[i] << (i + 1 < g.n ? ' ' : '\n');
    for (size_t i = 0; i < g.z.size(); ++i) out << g.z[i] << (i + 1 < g.z.size() ? ' ' : '\n');
    for (size_t i = 0; i < g.r.size(); ++i) out << g.r[i] << (i + 1 < g.r.size() ? ' ' : '\n');
    for (size_t i = 0; i < g.z.size(); ++i)
        for (size_t j = 0; j < g.r.size(); ++j)
            out << g.values[i * g.r.size() + j] << (j + 1 < g.r.size() ? ' ' : '\n');
}

SampledFunction to_sampled(const AxisymmetricGrid& g) {
    SampledFunction s;
    s.n = g.n;
    auto shared = std::make_shared<AxisymmetricGrid>(g);
    s.f = [shared](const Vec& y) { return shared->interpolate(y); };
    s.directions = {g.axis};
    return s;
}


namespace {

struct Peak {
    Vec y;
    double value;
};

// Maximum of f over the ball restricted to span(basis): coarse grid, then
// compass search down to 1e-8.
Peak find_peak(const std::function<double(const Vec&)>& f, const std::vector<Vec>& basis, int n) {
    const int k = static_cast<int>(basis.size());
    const int per_axis = k == 1 ? 801 : (k == 2 ? 121 : 31);
    std::vector<int> idx(k, 0);
    long total = 1;
    for (int i = 0; i < k; ++i) total *= per_axis;
    Peak best{Vec::Zero(n), -std::numeric_limits<double>::infinity()};
    std::vector<double> coef(k);
    for (long t = 0; t < total; ++t) {
        long r = t;
        Vec y = Vec::Zero(n);
        for (int i = 0; i < k; ++i) {
            double c = -0.98 + 1.96 * double(r % per_axis) / (per_axis - 1);
            r /= per_axis;
            y += c * basis[i];
        }
        if (y.norm() >= 0.98) continue;
        double v = f(y);
        if (v > best.value) best = {y, v};
    }
    double h = 2.0 / (per_axis - 1);
    while (h > 1e-8) {
        bool moved = false;
        for (int i = 0; i < k; ++i)
            for (double sgn : {1.0, -1.0}) {
                Vec y = best.y + sgn * h * basis[i];
                if (y.norm() >= 0.999) continue;
                double v = f(y);
                if (v > best.value) best = {y, v}, moved = true;
            }
        if (!moved) h *= 0.5;
    }
    return best;
}

// Pairing directions of one bubble: Delta^2 of P delta, lambda dP/dlambda and
// lambda^{-1} dP/da . e, i.e. D(delta^p).
void direction_sources(const Bubble& b, const Vec& y, const std::vector<Vec>& basis, double p,
                       double* out) {
    double ld = log_delta(b, y);
    double dp = std::exp(p * ld);
    DeltaParamGrad g = delta_params_grad(b, y);
    double dpm1 = p * std::exp((p - 1.0) * ld);
    out[0] = dp;
    out[1] = dpm1 * g.lambda_dlambda;
    for (size_t e = 0; e < basis.size(); ++e) out[2 + e] = dpm1 * g.a_grad.dot(basis[e]);
}

// Tangent vectors D_k delta used for the Gauss-Newton Gram matrix.
void direction_values(const Bubble& b, const Vec& y, const std::vector<Vec>& basis, double* out) {
    DeltaParamGrad g = delta_params_grad(b, y);
    out[0] = delta_eval(b, y);
    out[1] = g.lambda_dlambda;
    for (size_t e = 0; e < basis.size(); ++e) out[2 + e] = g.a_grad.dot(basis[e]);
}

}  // namespace

DecomposeResult decompose(const SampledFunction& u, int p, const DecomposeOptions& opt) {
    const int n = u.n;
    require_dimension(n);
    if (p != 1 && p != 2) throw ValidationError("decompose: p must be 1 or 2");
    const double pe = critical_exponent(n);
    const double m = 0.5 * (n - 4);
    const double cn = c_n(n);

    std::vector<Vec> dir_in = u.directions;
    for (const Bubble& b : opt.initial) dir_in.push_back(b.a);
    std::vector<Vec> basis = span_basis(dir_in);
    if (basis.empty()) {
        Vec e = Vec::Zero(n);
        e[0] = 1.0;
        basis.push_back(e);
    }
    const int kb = static_cast<int>(basis.size());
    const int per = 2 + kb;
    const int N = per * p;

    std::vector<Bubble> bub;
    std::vector<double> alpha;
    if (static_cast<int>(opt.initial.size()) == p) {
        bub = opt.initial;
        for (const Bubble& b : bub) alpha.push_back(u.f(b.a) / delta_eval(b, b.a));
    } else {
        std::function<double(const Vec&)> g = u.f;
        for (int i = 0; i < p; ++i) {
            Peak pk = find_peak(g, basis, n);
            if (!(pk.value > 0)) throw ConvergenceError("decompose: no positive peak found");
            // Peak of alpha delta is alpha c_n lambda^m; start from alpha = 1.
            double lam = std::pow(pk.value / cn, 1.0 / m);
            bub.push_back({pk.y, lam});
            alpha.push_back(1.0);
            Bubble found = bub.back();
            g = [g, found](const Vec& y) { return g(y) - delta_eval(found, y); };
        }
    }

    DecomposeResult res;
    auto pack = [&]() {
        std::vector<double> v;
        for (int i = 0; i < p; ++i) {
            v.push_back(alpha[i]);
            v.push_back(bub[i].lambda);
            for (int j = 0; j < n; ++j) v.push_back(bub[i].a[j]);
        }
        return v;
    };

    auto make_pb = [&](const std::vector<Bubble>& bs) {
        std::vector<ProjectedBubble> out;
        for (const Bubble& b : bs) out.emplace_back(b, opt.mode, opt.projection);
        return out;
    };

    // b_m = (u - sum alpha_j P delta_j, v_m)_2 for all directions.
    auto pairings = [&](const std::vector<Bubble>& bs, const std::vector<double>& al,
                        const std::vector<ProjectedBubble>& pbs) {
        BallIntegrand in;
        in.n = n;
        in.components = N;
        for (const Bubble& b : bs) in.centers.push_back({b.a, b.lambda});
        in.directions = basis;
        std::vector<double> buf(per);
        in.f = [&](const Vec& y, double* out) {
            double r = u.f(y);
            for (int j = 0; j < p; ++j) r -= al[j] * pbs[j].value(y);
            for (int i = 0; i < p; ++i) {
                direction_sources(bs[i], y, basis, pe, buf.data());
                for (int k = 0; k < per; ++k) out[i * per + k] = r * buf[k];
            }
        };
        return integrate_ball(in, opt.quad).value;
    };

    auto gram = [&](const std::vector<Bubble>& bs) {
        BallIntegrand in;
        in.n = n;
        in.components = N * N;
        for (const Bubble& b : bs) in.centers.push_back({b.a, b.lambda});
        in.directions = basis;
        std::vector<double> src(N), val(N);
        in.f = [&](const Vec& y, double* out) {
            for (int i = 0; i < p; ++i) {
                direction_sources(bs[i], y, basis, pe, &src[i * per]);
                direction_values(bs[i], y, basis, &val[i * per]);
            }
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) out[a * N + b] = src[a] * val[b];
        };
        std::vector<double> g = integrate_ball(in, opt.quad).value;
        Eigen::MatrixXd G(N, N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) G(a, b) = g[a * N + b];
        return Eigen::MatrixXd(0.5 * (G + G.transpose()));
    };

    double scale = 0.0;
    for (int i = 0; i < p; ++i) scale += alpha[i] * alpha[i];
    scale = std::sqrt(scale * S_n(n));

    auto measure = [&](const std::vector<double>& b, const Eigen::MatrixXd& G) {
        double worst = 0.0;
        for (int k = 0; k < N; ++k) worst = std::max(worst, std::fabs(b[k]) / std::sqrt(G(k, k)));
        return worst / scale;
    };

    std::vector<ProjectedBubble> pbs = make_pb(bub);
    std::vector<double> b = pairings(bub, alpha, pbs);
    Eigen::MatrixXd G = gram(bub);
    double merit = measure(b, G);
    int it = 0;
    for (; it < opt.max_iterations && merit > opt.tolerance; ++it) {
        Eigen::VectorXd rhs(N);
        for (int k = 0; k < N; ++k) rhs[k] = b[k];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double cond = svd.singularValues()[0] / svd.singularValues()[N - 1];
        if (!(cond < 1e12)) res.degenerate = true;
        Eigen::VectorXd c = svd.solve(rhs);
        double step = 1.0;
        bool accepted = false;
        for (int tries = 0; tries < 12; ++tries, step *= 0.5) {
            std::vector<Bubble> nb = bub;
            std::vector<double> na = alpha;
            bool ok = true;
            for (int i = 0; i < p; ++i) {
                double dal = c[i * per];
                double dt = c[i * per + 1] / alpha[i];
                na[i] = alpha[i] + step * dal;
                nb[i].lambda = bub[i].lambda * std::exp(std::clamp(step * dt, -0.5, 0.5));
                for (int e = 0; e < kb; ++e)
                    nb[i].a += step * c[i * per + 2 + e] / (alpha[i] * bub[i].lambda) * basis[e];
                if (!(na[i] > 0) || nb[i].a.norm() >= 0.999) ok = false;
            }
            if (!ok) continue;
            std::vector<ProjectedBubble> npbs = make_pb(nb);
            std::vector<double> nbv = pairings(nb, na, npbs);
            Eigen::MatrixXd nG = gram(nb);
            double nm = measure(nbv, nG);
            if (nm < merit || tries == 11) {
                bub = nb;
                alpha = na;
                pbs = std::move(npbs);
                b = nbv;
                G = nG;
                merit = nm;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    res.iterations = it;

    if (merit > opt.tolerance) {
        res.config = {bub, alpha, opt.mode};
        throw ConvergenceError("decompose: V0 residuals did not converge (" +
                                   std::to_string(merit) + ")",
                               pack());
    }

    // Canonical order: by lambda, then by coordinates.
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (bub[x].lambda != bub[y].lambda) return bub[x].lambda < bub[y].lambda;
        for (int j = 0; j < n; ++j)
            if (bub[x].a[j] != bub[y].a[j]) return bub[x].a[j] < bub[y].a[j];
        return false;
    });
    for (int i : order) {
        res.config.bubbles.push_back(bub[i]);
        res.config.alphas.push_back(alpha[i]);
        for (int k = 0; k < per; ++k) res.v0_residuals.push_back(b[i * per + k]);
    }
    res.config.mode = opt.mode;

    if (std::isfinite(u.norm2)) {
        double cross = 0.0, quad = 0.0;
        for (int i = 0; i < p; ++i) {
            // (u, P delta_i) = b_{i,0} + sum_j alpha_j (P delta_j, P delta_i)
            double ui = b[i * per];
            for (int j = 0; j < p; ++j) ui += alpha[j] * inner_product(pbs[j], pbs[i], opt.quad);
            cross += alpha[i] * ui;
            for (int j = 0; j < p; ++j) quad += alpha[i] * alpha[j] * inner_product(pbs[i], pbs[j], opt.quad);
        }
        double r2 = u.norm2 - 2.0 * cross + quad;
        res.residual_norm = std::sqrt(std::max(0.0, r2));
    }
    return res;
}

}  // namespace bilap

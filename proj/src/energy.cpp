#include "bilap/energy.hpp"

#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/green.hpp"

namespace bilap {

namespace {

void check_config(const Configuration& cfg) {
    if (cfg.bubbles.empty()) throw ValidationError("configuration has no bubbles");
    if (cfg.alphas.size() != cfg.bubbles.size())
        throw ValidationError("configuration: alphas and bubbles differ in length");
    const long n = cfg.bubbles[0].a.size();
    require_dimension(static_cast<int>(n));
    for (const Bubble& b : cfg.bubbles) {
        if (b.a.size() != n) throw ValidationError("configuration: mixed dimensions");
        if (!(b.lambda > 0) || !(b.a.norm() < 1.0))
            throw ValidationError("configuration: need lambda > 0 and points inside the ball");
    }
}

std::vector<Center> centers_of(const Configuration& cfg) {
    std::vector<Center> c;
    for (const Bubble& b : cfg.bubbles) c.push_back({b.a, b.lambda});
    return c;
}

}  // namespace

std::string PairingDirection::label() const {
    return (kind == Kind::Lambda ? "lambda_" : "a_") + std::to_string(index + 1);
}

std::vector<ProjectedBubble> project(const Configuration& cfg, const ProjectionSpec& spec) {
    check_config(cfg);
    std::vector<ProjectedBubble> pb;
    for (const Bubble& b : cfg.bubbles) pb.emplace_back(b, cfg.mode, spec);
    return pb;
}

double config_norm2(const Configuration& cfg, const std::vector<ProjectedBubble>& pb,
                    const QuadratureSpec& spec) {
    double s = 0.0;
    for (size_t i = 0; i < pb.size(); ++i) {
        s += cfg.alphas[i] * cfg.alphas[i] * inner_product(pb[i], pb[i], spec);
        for (size_t j = i + 1; j < pb.size(); ++j)
            s += 2.0 * cfg.alphas[i] * cfg.alphas[j] * inner_product(pb[i], pb[j], spec);
    }
    if (!(s > 0)) throw NumericalError("configuration has vanishing norm");
    return s;
}

double j_quadrature(const Configuration& cfg, const std::vector<ProjectedBubble>& pb,
                    const KField& K, const QuadratureSpec& spec) {
    const int n = pb[0].dim();
    const double q = sobolev_exponent(n);
    double norm2 = config_norm2(cfg, pb, spec);
    BallIntegrand in;
    in.n = n;
    in.centers = centers_of(cfg);
    in.directions = K.symmetry_directions();
    in.f = [&](const Vec& y, double* out) {
        double u = 0.0;
        for (size_t i = 0; i < pb.size(); ++i) u += cfg.alphas[i] * pb[i].value(y);
        out[0] = K.value(y) * std::pow(std::abs(u), q);
    };
    double N = integrate_ball(in, spec).value[0];
    if (!(N > 0)) throw NumericalError("j_quadrature: nonpositive integral of K|u|^q");
    return norm2 * std::pow(N, -(n - 4.0) / n);
}

double j_quadrature(const Configuration& cfg, const KField& K, const EnergySpec& spec) {
    auto pb = project(cfg, spec.projection);
    return j_quadrature(cfg, pb, K, spec.quad);
}

EnergyReport j_expansion(const Configuration& cfg, const KField& K) {
    check_config(cfg);
    const int n = static_cast<int>(cfg.bubbles[0].a.size());
    const double q = sobolev_exponent(n), m = 0.5 * (n - 4);
    const double S = S_n(n), C2 = c2(n), C3 = c3(n);
    const size_t p = cfg.bubbles.size();
    std::vector<double> Kv(p);
    double sa2 = 0.0, saq = 0.0, sk = 0.0;
    for (size_t i = 0; i < p; ++i) {
        Kv[i] = K.value(cfg.bubbles[i].a);
        if (!(Kv[i] > 0)) throw ValidationError("j_expansion: K must be positive at the concentration points");
        double a = cfg.alphas[i];
        sa2 += a * a;
        saq += std::pow(std::abs(a), q) * Kv[i];
        sk += std::pow(Kv[i], (4.0 - n) / 4.0);
    }
    EnergyReport r;
    r.leading = std::pow(S, 4.0 / n) * sa2 / std::pow(saq, (n - 4.0) / n);
    const double pre = r.leading / (S * sk);
    double tdk = 0.0, th = 0.0, te = 0.0, scale = 0.0;
    for (size_t i = 0; i < p; ++i) {
        const Bubble& bi = cfg.bubbles[i];
        double lam = bi.lambda, d = boundary_distance(bi.a);
        tdk += K.laplacian(bi.a) / (std::pow(Kv[i], n / 4.0) * lam * lam);
        th += robin(bi.a) / (std::pow(Kv[i], m / 2.0) * std::pow(lam, n - 4.0));
        scale += 1.0 / (lam * lam) + std::pow(lam * d, 4.0 - n);
        for (size_t j = 0; j < p; ++j) {
            if (j == i) continue;
            const Bubble& bj = cfg.bubbles[j];
            double e = eps(bi, bj);
            te += (e - regular_part_H(bi.a, bj.a) / std::pow(lam * bj.lambda, m)) /
                  std::pow(Kv[i] * Kv[j], (n - 4.0) / 8.0);
            scale += 0.5 * e;
        }
    }
    r.delta_k_term = pre * (-(n - 4.0) / n * C3 * tdk);
    r.h_term = pre * C2 * th;
    r.eps_term = pre * (-C2 * te);
    r.J_expansion = ((r.leading + r.delta_k_term) + r.h_term) + r.eps_term;
    r.remainder_scale = r.leading * scale;
    return r;
}

EnergyReport energy_report(const Configuration& cfg, const KField& K, const EnergySpec& spec) {
    EnergyReport r = j_expansion(cfg, K);
    r.J_quadrature = j_quadrature(cfg, K, spec);
    return r;
}

double config_norm2_expansion(const Configuration& cfg) {
    check_config(cfg);
    const int n = static_cast<int>(cfg.bubbles[0].a.size());
    const double m = 0.5 * (n - 4), S = S_n(n), C2 = c2(n);
    double s = 0.0;
    for (size_t i = 0; i < cfg.bubbles.size(); ++i) {
        const Bubble& bi = cfg.bubbles[i];
        double ai = cfg.alphas[i];
        s += ai * ai * (S - C2 * robin(bi.a) / std::pow(bi.lambda, n - 4.0));
        for (size_t j = 0; j < cfg.bubbles.size(); ++j) {
            if (j == i) continue;
            const Bubble& bj = cfg.bubbles[j];
            s += ai * cfg.alphas[j] * C2 *
                 (eps(bi, bj) - regular_part_H(bi.a, bj.a) / std::pow(bi.lambda * bj.lambda, m));
        }
    }
    return s;
}

double grad_pairing_expansion(const Configuration& cfg, const KField& K, const PairingDirection& d) {
    check_config(cfg);
    const int n = static_cast<int>(cfg.bubbles[0].a.size());
    const size_t i = static_cast<size_t>(d.index);
    if (d.index < 0 || i >= cfg.bubbles.size()) throw ValidationError("pairing: bubble index out of range");
    const double m = 0.5 * (n - 4), C2 = c2(n), C3 = c3(n);
    const double J = j_expansion(cfg, K).J_expansion;
    const double norm = std::sqrt(config_norm2_expansion(cfg));
    std::vector<double> al(cfg.alphas.size());
    for (size_t k = 0; k < al.size(); ++k) al[k] = cfg.alphas[k] / norm;
    const Bubble& bi = cfg.bubbles[i];
    const double lam = bi.lambda, Ki = K.value(bi.a);

    double s = 0.0;
    if (d.kind == PairingDirection::Kind::Lambda) {
        s += (n - 4.0) / n * C3 * al[i] * K.laplacian(bi.a) / (Ki * lam * lam);
        s -= m * C2 * al[i] * robin(bi.a) / std::pow(lam, n - 4.0);
        for (size_t j = 0; j < cfg.bubbles.size(); ++j) {
            if (j == i) continue;
            const Bubble& bj = cfg.bubbles[j];
            s -= C2 * al[j] *
                 (eps_derivs(bi, bj).lambda_dlambda +
                  m * regular_part_H(bi.a, bj.a) / std::pow(lam * bj.lambda, m));
        }
    } else {
        if (d.e.size() != bi.a.size()) throw ValidationError("pairing: direction has wrong dimension");
        const Vec& e = d.e;
        const double Jn = std::pow(J, n / (n - 4.0));
        s -= c4_asymptotic(n) * std::pow(std::abs(al[i]), critical_exponent(n)) * Jn *
             K.grad(bi.a).dot(e) / lam;
        s += 0.5 * C2 * al[i] / std::pow(lam, n - 3.0) * grad_robin(bi.a).dot(e);
        for (size_t j = 0; j < cfg.bubbles.size(); ++j) {
            if (j == i) continue;
            const Bubble& bj = cfg.bubbles[j];
            double inter = eps_derivs(bi, bj).a_grad.dot(e) -
                           grad_H(bi.a, bj.a).dot(e) / (std::pow(lam * bj.lambda, m) * lam);
            double bal = 1.0 - Jn * (std::pow(std::abs(al[i]), 8.0 / (n - 4)) * Ki +
                                     std::pow(std::abs(al[j]), 8.0 / (n - 4)) * K.value(bj.a));
            s += C2 * al[j] * inter * bal;
        }
    }
    return 2.0 * J * s;
}

namespace {

Configuration perturbed(const Configuration& cfg, const PairingDirection& d, double t) {
    Configuration c = cfg;
    Bubble& b = c.bubbles[static_cast<size_t>(d.index)];
    if (d.kind == PairingDirection::Kind::Lambda)
        b.lambda *= std::exp(t);
    else
        b.a += (t / b.lambda) * d.e;
    return c;
}

}  // namespace

PairingReport grad_pairing_fd(const Configuration& cfg, const KField& K, const PairingDirection& d,
                              const FdSpec& spec) {
    check_config(cfg);
    if (d.index < 0 || static_cast<size_t>(d.index) >= cfg.bubbles.size())
        throw ValidationError("pairing: bubble index out of range");
    if (!(spec.h > 0)) throw ValidationError("pairing: step must be positive");
    PairingReport r;
    r.direction = d;
    r.expansion = grad_pairing_expansion(cfg, K, d);

    auto pb = project(cfg, spec.energy.projection);
    const double norm2 = config_norm2(cfg, pb, spec.energy.quad);
    const double ahat = cfg.alphas[static_cast<size_t>(d.index)] / std::sqrt(norm2);
    auto J_at = [&](double t) { return j_quadrature(perturbed(cfg, d, t), K, spec.energy); };
    const double h = spec.h;
    double jp1 = J_at(h), jm1 = J_at(-h), jp2 = J_at(0.5 * h), jm2 = J_at(-0.5 * h);
    r.fd_h = (jp1 - jm1) / (2.0 * h * ahat);
    r.fd_h2 = (jp2 - jm2) / (h * ahat);
    r.fd = (4.0 * r.fd_h2 - r.fd_h) / 3.0;
    r.step_change = std::abs(r.fd_h2 - r.fd_h) / std::max(std::abs(r.fd_h2), 1e-300);
    r.relative_gap = std::abs(r.fd - r.expansion) / std::max(std::abs(r.fd), 1e-300);
    const double tol = std::max(spec.energy.quad.rel_tol, 1e-15) * std::abs(jp2);
    r.noise_floor = 2.0 * tol / (h * std::abs(ahat));
    r.noisy = r.noise_floor > 0.1 * std::abs(r.fd);
    return r;
}

NegativePartReport negative_part_indicator(const SampledFunction& u, const KField& K,
                                           const NegativePartOptions& opt) {
    require_dimension(u.n);
    if (!u.f) throw ValidationError("negative_part_indicator: function has no evaluator");
    if (!(opt.eta > 0)) throw ValidationError("negative_part_indicator: eta must be positive");
    const int n = u.n;
    const double q = sobolev_exponent(n);
    BallIntegrand in;
    in.n = n;
    in.components = 2;
    in.centers = opt.centers;
    if (in.centers.empty()) in.centers = {{Vec::Zero(n), 1.0}};
    in.directions = u.directions;
    for (const Vec& v : K.symmetry_directions()) in.directions.push_back(v);
    in.f = [&](const Vec& y, double* out) {
        double v = u.f(y);
        double a = std::pow(std::abs(v), q);
        out[0] = K.value(y) * a;
        out[1] = v < 0.0 ? a : 0.0;
    };
    QuadResult res = integrate_ball(in, opt.quad);
    NegativePartReport r;
    r.neg_norm = std::pow(std::max(res.value[1], 0.0), 1.0 / q);
    if (std::isnan(u.norm2)) {
        if (r.neg_norm > 0.0)
            throw ValidationError("negative_part_indicator: ||u||_2 unknown, V_eta membership undecidable");
        r.in_V_eta = true;
        return r;
    }
    if (!(u.norm2 > 0) || !(res.value[0] > 0))
        throw NumericalError("negative_part_indicator: vanishing norm");
    r.J = u.norm2 * std::pow(res.value[0], -(n - 4.0) / n);
    // u is taken on the unit sphere of the energy norm.
    double neg = r.neg_norm / std::sqrt(u.norm2);
    // In logs: exp(2J) overflows long before the product does.
    if (neg == 0.0) {
        r.indicator = 0.0;
    } else {
        double log_ind = (2.0 * n - 4.0) / (n - 4.0) * std::log(r.J) + 2.0 * r.J + 8.0 / (n - 4.0) * std::log(neg);
        r.indicator = std::exp(log_ind);
    }
    r.in_V_eta = r.indicator < opt.eta;
    return r;
}

C4Estimate c4_estimate(int n, const C4Options& opt) {
    require_dimension(n);
    if (opt.lambdas.size() < 3) throw ValidationError("c4_estimate: need at least three lambdas");
    KField K = catalogued_k(opt.k_field, n);
    Vec a = Vec::Zero(n);
    a[0] = opt.offset;
    Vec g = K.grad(a);
    if (g.norm() < 1e-8) throw ValidationError("c4_estimate: grad K vanishes at the sample point");
    PairingDirection d{PairingDirection::Kind::A, 0, g / g.norm()};
    FdSpec fd;
    C4Estimate est;
    for (double lam : opt.lambdas) {
        Configuration cfg{{{a, lam}}, {opt.alpha_scale}, PdeltaMode::Asymptotic};
        PairingReport pr = grad_pairing_fd(cfg, K, d, fd);
        double J = j_quadrature(cfg, K, fd.energy);
        auto pb = project(cfg);
        double ahat = opt.alpha_scale / std::sqrt(config_norm2(cfg, pb, fd.energy.quad));
        double hterm = 2.0 * J * 0.5 * c2(n) * ahat / std::pow(lam, n - 3.0) * grad_robin(a).dot(d.e);
        double lead = 2.0 * J * std::pow(ahat, critical_exponent(n)) * std::pow(J, n / (n - 4.0)) *
                      g.norm() / lam;
        est.lambdas.push_back(lam);
        est.ratios.push_back(-(pr.fd - hterm) / lead);
    }
    // ratio = c4 (1 + O(lambda^{-2})): Richardson on consecutive pairs.
    const size_t k = est.ratios.size();
    auto rich = [&](size_t i) {
        double t = est.lambdas[i + 1] / est.lambdas[i];
        return (t * t * est.ratios[i + 1] - est.ratios[i]) / (t * t - 1.0);
    };
    double r1 = rich(k - 3), r2 = rich(k - 2);
    est.value = r2;
    est.spread = std::abs(r2 - r1);
    est.low_confidence = est.spread > 1e-2 * std::abs(r2);
    return est;
}

}  // namespace bilap

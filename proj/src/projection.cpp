#include "bilap/projection.hpp"

#include <cmath>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"
#include "bilap/green.hpp"
#include "bilap/numerics/radial_quadrature.hpp"

namespace bilap {

namespace {

double delta_pow(const Bubble& b, const Vec& z, double p) { return std::exp(p * log_delta(b, z)); }

// Outside the ball the Navier problem sees the free-space kernel, inside the
// regular part: see phi_exact.
double phi_kernel(const Vec& x, const Vec& z, int n) {
    if (z.squaredNorm() < 1.0) return regular_part_H(x, z);
    return std::pow((x - z).norm(), 4.0 - n);
}

}  // namespace

double phi_asymptotic(const Bubble& b, const Vec& x) {
    const int n = static_cast<int>(x.size());
    return c_n(n) * std::pow(b.lambda, -0.5 * (n - 4)) * regular_part_H(b.a, x);
}

double phi_exact(const Bubble& b, const Vec& x, const QuadratureSpec& spec) {
    const int n = static_cast<int>(x.size());
    require_dimension(n);
    const double p = critical_exponent(n);
    const double dx = 1.0 - x.norm();
    if (dx <= 0.0) return delta_eval(b, x);
    const double lam = b.lambda;
    const double sep = (x - b.a).norm();

    BallIntegrand in;
    in.n = n;
    in.domain = Domain::Space;
    in.f = [&](const Vec& z, double* out) {
        out[0] = phi_kernel(x, z, n) * delta_pow(b, z, p);
    };
    double value;
    if (dx < 0.5 * sep && lam * sep > 4.0) {
        // x close to the boundary: a second center resolves the kernel's
        // near-singular behavior at scale d(x); it owns roughly the ball of
        // radius 2 d(x) around x.
        in.centers = {{b.a, lam, 1.0 / sep}, {x, 1.0 / dx, 0.5 / dx}};
        value = integrate_ball(in, spec).value[0];
    } else {
        // H(x,.) is biharmonic, so on B(a,R), R = d(a), its spherical means
        // are H(x,a) + rho^2 Delta H(x,a) / (2n); delta^p is radial there.
        const double R = 1.0 - b.a.norm();
        const double m = 0.5 * (n - 4);
        double s = lam * R / std::sqrt(1.0 + lam * lam * R * R);
        double pref = std::pow(c_n(n), p) * unit_sphere_area(n) * std::pow(lam, -m);
        double M0 = pref * (std::pow(s, n) / n - std::pow(s, n + 2) / (n + 2));
        double M2 = pref / (lam * lam) * std::pow(s, n + 2) / (n + 2);
        in.centers = {{b.a, lam}};
        in.directions = {x};
        in.excluded_radius = R;
        double rest = integrate_ball(in, spec).value[0];
        value = regular_part_H(x, b.a) * M0 + laplacian_y_H(x, b.a) * M2 / (2.0 * n) + rest;
    }
    return value / kappa_n(n);
}

// Chebyshev-Lobatto table of phi over (u, psi): u = log1p(lambda rho) /
// log1p(lambda rho_max(psi)) with rho = |x - a|, psi = cosine between x - a
// and a/|a|. phi is axially symmetric about a, so this covers the ball.
struct PhiTable {
    Vec a, ahat, eperp;
    double lambda = 1.0;
    bool radial = false;
    int nu = 0, npsi = 0;  // node counts
    std::vector<double> values;

    static double node(int j, int N) { return std::cos(M_PI * j / N); }

    double rho_max(double psi) const {
        double ra = a.norm();
        double ad = ra * psi;
        return -ad + std::sqrt(ad * ad + 1.0 - ra * ra);
    }

    static void weights(double t, int N, std::vector<double>& w, int& exact) {
        w.assign(N + 1, 0.0);
        exact = -1;
        for (int j = 0; j <= N; ++j) {
            double diff = t - node(j, N);
            if (diff == 0.0) {
                exact = j;
                return;
            }
            double c = (j == 0 || j == N) ? 0.5 : 1.0;
            if (j % 2) c = -c;
            w[j] = c / diff;
        }
    }

    double eval(const Vec& x) const {
        Vec d = x - a;
        double rho = d.norm();
        double psi = (radial || rho == 0.0) ? 0.0 : std::clamp(d.dot(ahat) / rho, -1.0, 1.0);
        double L = std::log1p(lambda * rho_max(psi));
        double u = std::clamp(std::log1p(lambda * rho) / L, 0.0, 1.0);
        double tu = 2.0 * u - 1.0;
        int Nu = nu - 1, Np = npsi - 1;
        std::vector<double> wu, wp;
        int eu, ep;
        weights(tu, Nu, wu, eu);
        if (radial) {
            if (eu >= 0) return values[eu];
            double num = 0, den = 0;
            for (int i = 0; i <= Nu; ++i) num += wu[i] * values[i], den += wu[i];
            return num / den;
        }
        weights(psi, Np, wp, ep);
        auto row = [&](int i) {
            const double* v = &values[static_cast<size_t>(i) * npsi];
            if (ep >= 0) return v[ep];
            double num = 0, den = 0;
            for (int j = 0; j <= Np; ++j) num += wp[j] * v[j], den += wp[j];
            return num / den;
        };
        if (eu >= 0) return row(eu);
        double num = 0, den = 0;
        for (int i = 0; i <= Nu; ++i) num += wu[i] * row(i), den += wu[i];
        return num / den;
    }
};

namespace {

std::shared_ptr<const PhiTable> build_table(const Bubble& b, const ProjectionSpec& spec) {
    auto t = std::make_shared<PhiTable>();
    const int n = static_cast<int>(b.a.size());
    t->a = b.a;
    t->lambda = b.lambda;
    double ra = b.a.norm();
    t->radial = ra < 1e-12;
    t->nu = spec.table_radial + 1;
    t->npsi = t->radial ? 1 : spec.table_angular + 1;
    if (t->radial) {
        t->ahat = Vec::Zero(n);
        t->ahat[0] = 1.0;
    } else {
        t->ahat = b.a / ra;
    }
    t->eperp = Vec::Zero(n);
    int k = std::abs(t->ahat[0]) < 0.9 ? 0 : 1;
    t->eperp[k] = 1.0;
    t->eperp -= t->eperp.dot(t->ahat) * t->ahat;
    t->eperp /= t->eperp.norm();
    t->values.resize(static_cast<size_t>(t->nu) * t->npsi);
    for (int i = 0; i < t->nu; ++i) {
        double u = 0.5 * (PhiTable::node(i, t->nu - 1) + 1.0);
        for (int j = 0; j < t->npsi; ++j) {
            double psi = t->radial ? 1.0 : PhiTable::node(j, t->npsi - 1);
            Vec om = psi * t->ahat + std::sqrt(std::max(0.0, 1.0 - psi * psi)) * t->eperp;
            double L = std::log1p(b.lambda * t->rho_max(psi));
            double rho = std::expm1(u * L) / b.lambda;
            Vec x = b.a + rho * om;
            double v = (i == 0) ? delta_eval(b, x) : phi_exact(b, x, spec.inner);
            t->values[static_cast<size_t>(i) * t->npsi + j] = v;
        }
    }
    return t;
}

}  // namespace

ProjectedBubble::ProjectedBubble(Bubble b, PdeltaMode mode, const ProjectionSpec& spec)
    : b_(std::move(b)), mode_(mode), spec_(spec) {
    const int n = static_cast<int>(b_.a.size());
    require_dimension(n);
    if (!(b_.lambda > 0) || b_.a.norm() >= 1.0)
        throw ValidationError("ProjectedBubble: need lambda > 0 and a inside the ball");
    if (mode_ == PdeltaMode::Exact && spec_.use_table) table_ = build_table(b_, spec_);
}

double ProjectedBubble::phi(const Vec& x) const {
    if (mode_ == PdeltaMode::Asymptotic) return phi_asymptotic(b_, x);
    if (table_) return table_->eval(x);
    return phi_exact(b_, x, spec_.inner);
}

DeltaParamGrad ProjectedBubble::params_grad(const Vec& x) const {
    const int n = dim();
    const double m = 0.5 * (n - 4);
    DeltaParamGrad g = delta_params_grad(b_, x);
    double pref = c_n(n) * std::pow(b_.lambda, -m);
    g.lambda_dlambda += m * pref * regular_part_H(b_.a, x);
    g.a_grad -= pref / b_.lambda * grad_H(b_.a, x);
    return g;
}

double pdelta(const ProjectedBubble& pb, const Vec& x, const QuadratureSpec& spec) {
    if (pb.mode() == PdeltaMode::Asymptotic) return pb.value(x);
    return pb.delta(x) - phi_exact(pb.bubble(), x, spec);
}

double projection_deficit(const ProjectedBubble& u, const QuadratureSpec& spec) {
    const Bubble& b = u.bubble();
    const int n = u.dim();
    const double p = critical_exponent(n), q = sobolev_exponent(n);
    BallIntegrand out;
    out.n = n;
    out.domain = Domain::Exterior;
    out.centers = {{b.a, b.lambda}};
    out.decay_power = n;
    out.f = [&](const Vec& z, double* o) {
        o[0] = z.squaredNorm() >= 1.0 ? delta_pow(b, z, q) : 0.0;
    };
    BallIntegrand in;
    in.n = n;
    in.centers = {{b.a, b.lambda}};
    in.f = [&](const Vec& z, double* o) { o[0] = u.phi(z) * delta_pow(b, z, p); };
    return integrate_ball(out, spec).value[0] + integrate_ball(in, spec).value[0];
}

double inner_product(const ProjectedBubble& ui, const ProjectedBubble& uj,
                     const QuadratureSpec& spec) {
    const Bubble& bi = ui.bubble();
    const Bubble& bj = uj.bubble();
    const int n = ui.dim();
    if (bi.a == bj.a && bi.lambda == bj.lambda && ui.mode() == uj.mode())
        return S_n(n) - projection_deficit(ui, spec);
    const double p = critical_exponent(n);
    BallIntegrand in;
    in.n = n;
    in.centers = {{bi.a, bi.lambda}, {bj.a, bj.lambda}};
    in.f = [&](const Vec& z, double* o) { o[0] = ui.value(z) * delta_pow(bj, z, p); };
    return integrate_ball(in, spec).value[0];
}

}  // namespace bilap

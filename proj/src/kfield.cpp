#include "bilap/kfield.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"

namespace bilap {

KField::KField(int n, std::string name, std::string description, std::vector<KTerm> terms)
    : n_(n), name_(std::move(name)), description_(std::move(description)), terms_(std::move(terms)) {
    std::vector<Vec> raw;
    for (const KTerm& t : terms_) {
        if ((t.kind == KTerm::Kind::Quadratic || t.kind == KTerm::Kind::Gaussian) &&
            t.center.size() != n_)
            throw ValidationError("KField: term center has wrong dimension");
        if (t.kind == KTerm::Kind::Quadratic && t.weights.size() != n_)
            throw ValidationError("KField: quadratic weights have wrong dimension");
        if (t.kind == KTerm::Kind::Quadratic || t.kind == KTerm::Kind::Gaussian)
            raw.push_back(t.center);
        if (t.kind == KTerm::Kind::Quadratic) {
            // Anisotropic weights single out coordinate axes.
            for (int i = 0; i < n_; ++i)
                if (t.weights[i] != t.weights[0]) {
                    for (int j = 0; j < n_; ++j)
                        if (t.weights[j] != t.weights[n_ - 1]) {
                            Vec e = Vec::Zero(n_);
                            e[j] = 1.0;
                            raw.push_back(e);
                        }
                    break;
                }
        }
        if (t.kind == KTerm::Kind::Monkey) {
            Vec e1 = Vec::Zero(n_), e2 = Vec::Zero(n_);
            e1[0] = 1.0;
            e2[1] = 1.0;
            raw.push_back(e1);
            raw.push_back(e2);
        }
    }
    dirs_ = span_basis(raw);
}

double KField::value(const Vec& x) const {
    double s = 0.0;
    for (const KTerm& t : terms_) {
        switch (t.kind) {
            case KTerm::Kind::Constant: s += t.coef; break;
            case KTerm::Kind::Quadratic:
                s -= (t.weights.array() * (x - t.center).array().square()).sum();
                break;
            case KTerm::Kind::Quartic: s -= t.coef * x.squaredNorm() * x.squaredNorm(); break;
            case KTerm::Kind::Gaussian:
                s += t.coef * std::exp(-(x - t.center).squaredNorm() / (t.width * t.width));
                break;
            case KTerm::Kind::Monkey:
                s += t.coef * (x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]);
                break;
        }
    }
    return s;
}

Vec KField::grad(const Vec& x) const {
    Vec g = Vec::Zero(n_);
    for (const KTerm& t : terms_) {
        switch (t.kind) {
            case KTerm::Kind::Constant: break;
            case KTerm::Kind::Quadratic:
                g -= 2.0 * (t.weights.array() * (x - t.center).array()).matrix();
                break;
            case KTerm::Kind::Quartic: g -= 4.0 * t.coef * x.squaredNorm() * x; break;
            case KTerm::Kind::Gaussian: {
                double w2 = t.width * t.width;
                double e = t.coef * std::exp(-(x - t.center).squaredNorm() / w2);
                g -= (2.0 * e / w2) * (x - t.center);
                break;
            }
            case KTerm::Kind::Monkey:
                g[0] += t.coef * 3.0 * (x[0] * x[0] - x[1] * x[1]);
                g[1] -= t.coef * 6.0 * x[0] * x[1];
                break;
        }
    }
    return g;
}

Mat KField::hessian(const Vec& x) const {
    Mat h = Mat::Zero(n_, n_);
    for (const KTerm& t : terms_) {
        switch (t.kind) {
            case KTerm::Kind::Constant: break;
            case KTerm::Kind::Quadratic: h.diagonal() -= 2.0 * t.weights; break;
            case KTerm::Kind::Quartic:
                h -= 4.0 * t.coef * (x.squaredNorm() * Mat::Identity(n_, n_) + 2.0 * x * x.transpose());
                break;
            case KTerm::Kind::Gaussian: {
                double w2 = t.width * t.width;
                Vec d = x - t.center;
                double e = t.coef * std::exp(-d.squaredNorm() / w2);
                h += e * (4.0 / (w2 * w2) * d * d.transpose() - 2.0 / w2 * Mat::Identity(n_, n_));
                break;
            }
            case KTerm::Kind::Monkey:
                h(0, 0) += 6.0 * t.coef * x[0];
                h(1, 1) -= 6.0 * t.coef * x[0];
                h(0, 1) -= 6.0 * t.coef * x[1];
                h(1, 0) -= 6.0 * t.coef * x[1];
                break;
        }
    }
    return h;
}

double KField::laplacian(const Vec& x) const { return hessian(x).trace(); }

namespace {

Vec axis_point(int n, double x0, double x1 = 0.0) {
    Vec v = Vec::Zero(n);
    v[0] = x0;
    if (n > 1) v[1] = x1;
    return v;
}

KTerm constant(double c) { return {KTerm::Kind::Constant, c, 1.0, {}, {}}; }
KTerm quadratic(int n, double w, const Vec& c) {
    return {KTerm::Kind::Quadratic, 0.0, 1.0, c, Vec::Constant(n, w)};
}
KTerm quartic(double c) { return {KTerm::Kind::Quartic, c, 1.0, {}, {}}; }
KTerm gaussian(double a, double w, const Vec& c) { return {KTerm::Kind::Gaussian, a, w, c, {}}; }

// "base(k=v,k2=v2)" -> base and parameter map.
std::string parse_name(const std::string& name, std::map<std::string, double>& params) {
    auto open = name.find('(');
    if (open == std::string::npos) return name;
    if (name.back() != ')') throw ValidationError("catalogued_k: malformed parameters in " + name);
    std::string inside = name.substr(open + 1, name.size() - open - 2);
    std::stringstream ss(inside);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("catalogued_k: expected key=value in " + name);
        try {
            params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ValidationError("catalogued_k: bad number in " + name);
        }
    }
    return name.substr(0, open);
}

double param(const std::map<std::string, double>& p, const std::string& key, double def) {
    auto it = p.find(key);
    return it == p.end() ? def : it->second;
}

}  // namespace

std::vector<std::string> catalogue_names() {
    return {"constant",   "single-bump",   "two-bump",          "three-bump",
            "borderline", "monkey-saddle", "unequal-pair"};
}

KField catalogued_k(const std::string& full_name, int n) {
    require_dimension(n);
    std::map<std::string, double> prm;
    std::string name = parse_name(full_name, prm);
    const Vec zero = Vec::Zero(n);
    if (name == "constant") {
        double c = param(prm, "c", 1.0);
        if (!(c > 0)) throw ValidationError("constant K must be positive");
        return KField(n, full_name, "K = c", {constant(c)});
    }
    if (name == "single-bump") {
        return KField(n, full_name,
                      "1 - 0.2|x|^2 + 0.5 exp(-|x - 0.2 e1|^2 / 0.4^2): one interior maximum",
                      {constant(1.0), quadratic(n, 0.2, zero), gaussian(0.5, 0.4, axis_point(n, 0.2))});
    }
    if (name == "two-bump") {
        return KField(n, full_name,
                      "1 - 0.3|x|^4 + 0.5 g(x - 0.45 e1) + 0.4 g(x + 0.45 e1), g = exp(-|.|^2/0.18^2)",
                      {constant(1.0), quartic(0.3), gaussian(0.5, 0.18, axis_point(n, 0.45)),
                       gaussian(0.4, 0.18, axis_point(n, -0.45))});
    }
    if (name == "three-bump") {
        const double r = 0.45, pi = std::numbers::pi;
        std::vector<KTerm> t = {constant(1.0), quartic(0.3)};
        const double amp[3] = {0.5, 0.45, 0.4};
        for (int k = 0; k < 3; ++k) {
            double th = pi / 2 + 2.0 * pi * k / 3.0;
            t.push_back(gaussian(amp[k], 0.18, axis_point(n, r * std::cos(th), r * std::sin(th))));
        }
        return KField(n, full_name,
                      "1 - 0.3|x|^4 + bumps 0.5, 0.45, 0.4 (width 0.18) at the vertices of a "
                      "triangle of circumradius 0.45 in the (e1,e2)-plane",
                      t);
    }
    if (name == "borderline") {
        double w = param(prm, "w", 0.19);
        double a = param(prm, "A", 0.3);
        if (!(w > 0)) throw ValidationError("borderline: width must be positive");
        return KField(n, full_name,
                      "2 - A exp(-|x|^2/w^2) - 0.5|x - 0.5 e1|^2: a local minimum near the origin "
                      "whose Laplacian is tuned by w",
                      {constant(2.0), gaussian(-a, w, zero), quadratic(n, 0.5, axis_point(n, 0.5))});
    }
    if (name == "monkey-saddle") {
        Vec w = Vec::Constant(n, 0.3);
        w[0] = 0.0;
        w[1] = 0.0;
        return KField(n, full_name,
                      "1.5 + 0.2(x1^3 - 3 x1 x2^2) - 0.3 sum_{i>=3} x_i^2 - 0.3|x|^4: degenerate "
                      "critical point at the origin",
                      {constant(1.5), KTerm{KTerm::Kind::Monkey, 0.2, 1.0, {}, {}},
                       KTerm{KTerm::Kind::Quadratic, 0.0, 1.0, zero, w}, quartic(0.3)});
    }
    if (name == "unequal-pair") {
        // Two bumps whose maxima have heights close to 1 and h.
        double h = param(prm, "h", 0.9);
        const double base = 0.5 - 0.3 * std::pow(0.45, 4);
        if (!(h > base + 0.05)) throw ValidationError("unequal-pair: h too small");
        return KField(n, full_name,
                      "0.5 - 0.3|x|^4 + A1 g(x - 0.45 e1) + A2 g(x + 0.45 e1), g = exp(-|.|^2/0.18^2), "
                      "amplitudes set so the two maxima have heights close to 1 and h",
                      {constant(0.5), quartic(0.3), gaussian(1.0 - base, 0.18, axis_point(n, 0.45)),
                       gaussian(h - base, 0.18, axis_point(n, -0.45))});
    }
    std::string list;
    for (const std::string& s : catalogue_names()) list += (list.empty() ? "" : ", ") + s;
    throw ValidationError("unknown K field '" + full_name + "'; catalogue: " + list);
}

}  // namespace bilap

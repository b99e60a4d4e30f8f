#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bilap/numerics/ball_quadrature.hpp"

namespace bilap {

using Mat = Eigen::MatrixXd;

// One analytic term of K. Kinds:
//   Constant   value
//   Quadratic  -sum_i w_i (x_i - c_i)^2        (weights w, center c)
//   Quartic    -coef |x|^4
//   Gaussian   coef exp(-|x - c|^2 / width^2)
//   Monkey     coef (x_1^3 - 3 x_1 x_2^2)
struct KTerm {
    enum class Kind { Constant, Quadratic, Quartic, Gaussian, Monkey };
    Kind kind = Kind::Constant;
    double coef = 0.0;
    double width = 1.0;
    Vec center;   // Quadratic, Gaussian
    Vec weights;  // Quadratic
};

// K as a finite sum of analytic terms with exact first and second derivatives.
class KField {
public:
    KField(int n, std::string name, std::string description, std::vector<KTerm> terms);

    int dim() const { return n_; }
    const std::string& name() const { return name_; }
    const std::string& description() const { return description_; }
    const std::vector<KTerm>& terms() const { return terms_; }

    double value(const Vec& x) const;
    Vec grad(const Vec& x) const;
    Mat hessian(const Vec& x) const;
    double laplacian(const Vec& x) const;  // trace of hessian()
    // K depends on x only through projections onto these directions and |x_perp|.
    const std::vector<Vec>& symmetry_directions() const { return dirs_; }

private:
    int n_;
    std::string name_, description_;
    std::vector<KTerm> terms_;
    std::vector<Vec> dirs_;
};

// Catalogue entries. Names may carry parameters, e.g. "borderline(w=0.17)".
//   constant, single-bump, two-bump, three-bump, borderline(w=..), monkey-saddle,
//   unequal-pair(h=..)
KField catalogued_k(const std::string& name, int n);
std::vector<std::string> catalogue_names();

}  // namespace bilap

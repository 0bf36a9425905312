#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wobs/common.hpp"
#include "wobs/grid.hpp"

namespace wobs {

/// h^{jk}(x) together with its first and second spatial derivatives.
struct CoefficientSample {
    Mat2 h{};
    std::array<Mat2, 2> dh{};                 ///< dh[m][j][k] = d_m h^{jk}
    std::array<std::array<Mat2, 2>, 2> d2h{};  ///< d2h[m][p][j][k] = d_m d_p h^{jk}
};

/// The principal-part coefficient matrix field h^{jk}(x).
class CoefficientField {
public:
    using Evaluator = std::function<CoefficientSample(const Point&)>;

    CoefficientField(int dim, Evaluator eval, std::string label);

    static CoefficientField identity(int dim);
    static CoefficientField diagonal(const std::vector<double>& values);
    /// Smooth, non-constant, symmetric field with analytic derivatives.
    /// SPD for amplitude < 0.5.
    static CoefficientField perturbed(int dim, double amplitude);
    /// Multilinear interpolation of node values on a uniform lattice over
    /// [lo, hi]. `entries` is h11 (1D) or h11, h12, h22 (2D), each row-major.
    static CoefficientField tabulated(const Domain& domain, std::array<int, 2> cells,
                                      std::vector<std::vector<double>> entries);

    int dim() const { return dim_; }
    const std::string& label() const { return label_; }
    CoefficientSample sample(const Point& x) const { return eval_(x); }
    Mat2 value(const Point& x) const { return eval_(x).h; }

    /// Largest node-wise eigenvalue over the closed domain.
    double max_eigenvalue(const Grid& g) const;

private:
    int dim_;
    Evaluator eval_;
    std::string label_;
};

struct CoefficientCheck {
    double h0 = 0.0;  ///< largest constant with h xi.xi >= h0 |xi|^2 node-wise
    bool symmetric = false;
};

/// Node-wise symmetry and uniform ellipticity over the closed domain.
/// Throws VerificationError naming the first offending node.
CoefficientCheck verify_coefficients(const CoefficientField& h, const Grid& g);

}  // namespace wobs

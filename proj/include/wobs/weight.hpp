#pragma once

#include <functional>
#include <optional>
#include <string>

#include "wobs/coefficients.hpp"
#include "wobs/common.hpp"
#include "wobs/grid.hpp"
#include "wobs/polynomial.hpp"

namespace wobs {

/// d(x) and its derivatives through third order.
struct WeightSample {
    double value = 0.0;
    Vec2 grad{};
    Mat2 hess{};
    Ten2 third{};  ///< third[m][j][k] = d_m d_j d_k d
};

/// The escape function d(x). Normalization a*d + b and the shift d(x + zeta)
/// are applied lazily on every evaluation.
class WeightField {
public:
    using Evaluator = std::function<WeightSample(const Point&)>;

    WeightField(int dim, Evaluator raw, std::string label);

    /// |x - x0|^2, evaluated in the factored form.
    static WeightField paraboloid(const Point& x0, int dim);
    static WeightField polynomial(const Polynomial& p);
    static WeightField constant(double c, int dim);

    int dim() const { return dim_; }
    const std::string& label() const { return label_; }

    WeightSample sample(const Point& x) const;
    double value(const Point& x) const { return sample(x).value; }

    /// a*d + b on top of whatever normalization is already applied.
    WeightField normalized(double a, double b) const;
    /// x -> d(x + zeta).
    WeightField shifted(const Point& zeta) const;

    double scale() const { return scale_; }
    double offset() const { return offset_; }
    const Point& shift() const { return shift_; }

    /// Center of a paraboloid weight (the observation point x0), if known.
    const std::optional<Point>& center() const { return center_; }

    // Certification metadata filled in by the checks below.
    std::optional<double> mu0;
    std::optional<double> min_grad;
    std::optional<Point> critical_point;
    std::optional<double> s_limit;

private:
    int dim_;
    Evaluator raw_;
    std::string label_;
    double scale_ = 1.0;
    double offset_ = 0.0;
    Point shift_{0.0, 0.0};
    std::optional<Point> center_;
};

/// Pseudoconvexity matrix of the weight at x:
///   S_jk = sum_{j',k'} [2 h^{jk'} (h^{j'k} d_{j'})_{k'} - h^{jk}_{k'} h^{j'k'} d_{j'}].
Mat2 pseudoconvexity_matrix(const CoefficientSample& h, const WeightSample& d, int dim);

struct Condition1Result {
    double mu0 = 0.0;       ///< min over nodes of the generalized eigenvalue of S against h
    double min_grad = 0.0;  ///< min over the closed domain of |grad d|
    std::size_t mu0_node = 0;
    std::size_t min_grad_node = 0;
};

/// Evaluates both parts of the no-critical-point pseudoconvexity condition.
/// Never throws on failure; callers interpret mu0 <= 0 or min_grad == 0.
Condition1Result check_condition1(const CoefficientField& h, const WeightField& d, const Grid& g);

struct NormalizationOptions {
    double margin = 1e-6;  ///< added to 4/mu0 when the weight must be stretched
    double max_scale = 1e8;
};

/// Returns a*d + b with mu0(a*d+b) >= 4 and 1/4 h(grad, grad) >= d > 0 node-wise.
/// Throws VerificationError if no (a, b) up to max_scale works.
WeightField normalize_weight(const WeightField& d, double mu0, const CoefficientField& h, const Grid& g,
                             const NormalizationOptions& opt = {});

struct Condition2Result {
    double mu0 = 0.0;
    double s = 0.0;             ///< Richardson-extrapolated limit of h(grad, grad)/d at x0
    double order = 0.0;         ///< observed convergence order of the quotient
    std::array<double, 3> quotients{};  ///< shell averages at radii h, h/2, h/4
    bool degenerate = false;    ///< s not positive
};

/// Single-critical-point condition around x0. Throws VerificationError for a
/// second critical point (naming all critical nodes) or a nonzero minimum.
Condition2Result check_condition2(const CoefficientField& h, const WeightField& d, const Point& x0, const Grid& g);

}  // namespace wobs

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wobs/coefficients.hpp"
#include "wobs/geometry.hpp"
#include "wobs/jet.hpp"
#include "wobs/polynomial.hpp"
#include "wobs/weight.hpp"

namespace wobs {

/// (t, s, x1, x2). Spatial slots beyond the dimension are ignored.
using FramePoint = std::array<double, kMaxFrameVars>;
using FrameVec = std::array<double, kMaxFrameVars>;
using FrameMat = std::array<FrameVec, kMaxFrameVars>;

/// Value, gradient and Hessian of u over the frame variables.
struct TestSample {
    double value = 0.0;
    FrameVec grad{};
    FrameMat hess{};
};

/// A C^2 function u(t, s, x) with closed-form derivatives.
class TestFunction {
public:
    using Evaluator = std::function<TestSample(const FramePoint&)>;

    TestFunction(int space_dim, Evaluator eval, std::string label);

    static TestFunction zero(int space_dim);
    /// Polynomial in 2 + space_dim variables ordered (t, s, x...).
    static TestFunction polynomial(const Polynomial& p);
    /// Random coefficients in [-1, 1] on every monomial of total degree <= degree.
    static TestFunction random_polynomial(int space_dim, int degree, std::mt19937_64& rng);
    /// amplitude * prod_i sin(k_i z_i + phase_i).
    static TestFunction trigonometric(int space_dim, const FrameVec& k, const FrameVec& phase, double amplitude = 1.0);
    /// amplitude * exp(-sum_i (z_i - center_i)^2 / (2 width_i^2)); a zero width drops that variable.
    static TestFunction gaussian(int space_dim, const FramePoint& center, const FrameVec& width, double amplitude = 1.0);
    /// exp(-lambda * phi), so that theta * u is identically 1.
    static TestFunction inverse_weight(double lambda, const CarlemanParameters& p, const WeightField& d);
    static TestFunction product(const TestFunction& a, const TestFunction& b);
    /// prod_j sin(pi (x_j - lo_j) / (hi_j - lo_j)) times a Gaussian bump centred at t = s = T/2.
    static TestFunction sine_bump(const Domain& domain, double T, double width);

    int space_dim() const { return n_; }
    int nvars() const { return 2 + n_; }
    const std::string& label() const { return label_; }
    TestSample sample(const FramePoint& z) const { return eval_(z); }

private:
    int n_;
    Evaluator eval_;
    std::string label_;
};

struct SelfTestResult {
    std::vector<double> steps;
    std::vector<double> grad_errors;  ///< max abs error of central differences of the value
    std::vector<double> hess_errors;  ///< max abs error of central differences of the gradient
    double grad_order = 0.0;
    double hess_order = 0.0;
    bool passed = false;
};

/// Compares the closed-form derivatives to central differences on a step sweep.
/// Passes when the errors shrink at roughly second order (or sit at round-off).
SelfTestResult self_test(const TestFunction& u, const FramePoint& z, const std::vector<double>& steps = {1e-2, 5e-3,
                                                                                                        2.5e-3});

/// phi = d(x) - alpha (t-T/2)^2 - alpha (s-T/2)^2, ell = lambda phi, theta = e^ell.
struct WeightBundle {
    double phi = 0.0;
    double ell = 0.0;
    double theta = 0.0;  ///< +inf when the log-domain flag is set
    bool log_domain = false;
    FrameVec ell_a{};
    FrameMat ell_ab{};
    std::array<FrameMat, kMaxFrameVars> ell_abc{};
};

inline constexpr double kLogDomainThreshold = 300.0;

WeightBundle eval_weight(const FramePoint& z, double lambda, const CarlemanParameters& p, const WeightField& d);

/// Psi(x) with its spatial gradient stored in the x slots of the jet.
using PsiFunction = std::function<Jet(const Point&)>;

PsiFunction zero_psi();
PsiFunction constant_psi(double c);
/// -lambda sum (h^{jk} d_j)_k + 2 lambda (1 - alpha).
PsiFunction step3_psi(double lambda, double alpha, const CoefficientField& h, const WeightField& d);

/// Every quantity of the weighted identity at one point.
///
/// When |ell| exceeds the log-domain threshold, v and its derivatives carry
/// the factor exp(ell - ell_shift) with ell_shift = ell, and every quadratic
/// quantity below is scaled by exp(-2 ell_shift). `theta_scaled` is that factor.
struct CarlemanFrame {
    int n = 1;
    FramePoint z{};
    WeightBundle weight;
    double ell_shift = 0.0;
    double theta_scaled = 1.0;
    double v = 0.0;
    FrameVec dv{};
    double psi = 0.0;
    Vec2 dpsi{};
    double A = 0.0;
    double A_alt = 0.0;  ///< A in the form with h^{jk}_{x_j} ell_{x_k}
    Mat2 c{};
    double B = 0.0;
    Vec2 V{};
    double M = 0.0;
    double N = 0.0;
    double I1 = 0.0;
    double I2 = 0.0;
    double Pu = 0.0;  ///< u_tt + u_ss - sum (h^{jk} u_j)_k
};

CarlemanFrame eval_frame(const TestFunction& u, const FramePoint& z, double lambda, const CarlemanParameters& p,
                         const WeightField& d, const CoefficientField& h, const PsiFunction& psi);

struct IdentityResult {
    double residual = 0.0;
    double largest = 0.0;   ///< largest absolute summand at the point
    double relative = 0.0;  ///< residual / largest (0 when every summand vanishes)
    double lhs = 0.0;       ///< theta^2 (Pu)^2 + 2 div V + 2 M_t + 2 N_s
    double rhs = 0.0;       ///< the lower bound including B v^2
    double squares = 0.0;   ///< I1^2 + I2^2
    std::vector<std::pair<std::string, double>> summands;
};

/// residual = [theta^2 (Pu)^2 + 2 div V + 2 M_t + 2 N_s - rhs] - (I1^2 + I2^2).
IdentityResult check_identity(const TestFunction& u, const FramePoint& z, double lambda, const CarlemanParameters& p,
                              const WeightField& d, const CoefficientField& h, const PsiFunction& psi,
                              bool keep_summands = false);

struct SweepRow {
    double lambda = 0.0;
    double min_margin = 0.0;        ///< raw margin at the worst point (scaled when log-domain)
    double min_relative = 0.0;      ///< margin / largest summand at the worst point
    FramePoint argmin{};
    bool nonnegative = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double lambda0 = 0.0;
    bool found = false;
};

/// Relative round-off allowance when deciding the sign of a margin.
inline constexpr double kMarginFloor = 1e-10;

/// Evaluates LHS - RHS of the large-parameter inequality with the Step-3 Psi at
/// every sample point and every lambda. Throws PreconditionError for a point
/// outside Q(c) and VerificationError when no lambda on the grid works.
SweepResult check_pointwise_inequality(const TestFunction& u, const std::vector<double>& lambdas,
                                       const std::vector<FramePoint>& points, const CarlemanParameters& p,
                                       const WeightField& d, const CoefficientField& h, double h0);

/// Rejection sample of Q(c): (t, s) in (0,T)^2, x in Omega outside omega1, phi > c^2.
std::vector<FramePoint> sample_level_set(const WeightField& d, const CarlemanParameters& p,
                                         const Neighborhood& omega1, const Grid& g, std::size_t count,
                                         std::mt19937_64& rng);

/// Uniform points in (0,T)^2 x Omega.
std::vector<FramePoint> sample_box(const CarlemanParameters& p, const Grid& g, std::size_t count,
                                   std::mt19937_64& rng);

struct IdentityRow {
    std::string family;
    FramePoint z{};
    double residual = 0.0;
    double largest = 0.0;
};

void write_identity_csv(const std::string& path, const std::vector<IdentityRow>& rows, int space_dim);
void write_sweep_csv(const std::string& path, const SweepResult& r, int space_dim);

}  // namespace wobs

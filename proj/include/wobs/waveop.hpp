#pragma once

#include <array>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "wobs/coefficients.hpp"
#include "wobs/expression.hpp"
#include "wobs/grid.hpp"
#include "wobs/jet.hpp"

namespace wobs {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lower-order coefficients of w_tt - div(h grad w) = q w + q1 . grad w + q2 w_t.
///
/// Each field returns a jet whose t slot (0) and x slots (2, 3) hold its
/// first derivatives. `r` is the max of sup|q| and the W^{1,inf} norms of q1
/// and q2 over the sampled (t, x) grid.
class LowerOrderTerms {
public:
    using Field = std::function<Jet(double t, const Point& x)>;

    static LowerOrderTerms zero(int dim);
    static LowerOrderTerms from_expressions(int dim, const Expression& q, const std::vector<Expression>& q1,
                                            const Expression& q2);
    /// Each field is +-(1 + beta sin(k.x + phase) cos(omega t + psi)) with
    /// beta in [0, 1/2] and k, omega in [pi/4, pi], scaled so that its own
    /// norm equals r_target. Every draw therefore sits on the r bound.
    static LowerOrderTerms random(const Grid& g, double T, double r_target, std::mt19937_64& rng);

    int dim() const { return dim_; }
    double r() const { return r_; }
    bool vanishes() const { return zero_; }
    const std::string& description() const { return description_; }

    Jet q(double t, const Point& x) const { return q_(t, x); }
    Jet q1(int k, double t, const Point& x) const { return q1_[k](t, x); }
    Jet q2(double t, const Point& x) const { return q2_(t, x); }

    /// Recomputes r on the closure points of g times `time_samples` nodes of [0, T].
    void compute_r(const Grid& g, double T, int time_samples = 101);
    LowerOrderTerms scaled(double c) const;

private:
    int dim_ = 1;
    Field q_, q2_;
    std::array<Field, 2> q1_;
    double r_ = 0.0;
    bool zero_ = true;
    std::string description_;
};

/// -L + lambda0 on the inside nodes with homogeneous Dirichlet values
/// eliminated, assembled from a corner-gradient quadrature of h grad u . grad v.
///
/// The Cholesky factorization is computed once; solve() is const and may be
/// called concurrently.
class EllipticOperator {
public:
    EllipticOperator(const CoefficientField& h, GridPtr grid, double lambda0);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    double lambda0() const { return lambda0_; }
    std::size_t dofs() const { return dof_nodes_.size(); }
    const std::vector<std::size_t>& dof_nodes() const { return dof_nodes_; }
    /// -1 for nodes carrying the Dirichlet value.
    long dof_of(std::size_t node) const { return node_to_dof_[node]; }
    double cell_volume() const { return volume_; }
    double max_h_eigenvalue() const { return hmax_; }

    /// Discrete -L (no shift).
    const SparseMatrix& stiffness() const { return stiffness_; }
    /// Discrete -L + lambda0.
    SparseMatrix shifted() const;
    /// Central first differences along each axis.
    const SparseMatrix& gradient(int axis) const { return gradient_[axis]; }
    /// Upper bound on the spectrum of the stiffness (Gershgorin).
    double spectral_bound() const { return spectral_bound_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& w) const { return stiffness_ * w; }
    /// (-L + lambda0)^{-1} f.
    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& f) const;

    /// Midpoint-rule inner product.
    double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return volume_ * a.dot(b); }

    Eigen::VectorXd sample(const std::function<double(const Point&)>& f) const;
    /// Full lattice vector with zeros off the dofs.
    std::vector<double> extend(const Eigen::VectorXd& w) const;

private:
    GridPtr grid_;
    double lambda0_;
    double volume_ = 0.0;
    double hmax_ = 0.0;
    double spectral_bound_ = 0.0;
    std::vector<std::size_t> dof_nodes_;
    std::vector<long> node_to_dof_;
    SparseMatrix stiffness_;
    std::array<SparseMatrix, 2> gradient_;
    std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

using EllipticPtr = std::shared_ptr<const EllipticOperator>;

/// Verifies h, then assembles and factors. Throws PreconditionError for
/// lambda0 < 0 and NumericalError when the operator is not positive definite.
EllipticPtr assemble_elliptic(const CoefficientField& h, GridPtr grid, double lambda0);

/// sqrt(<f, (-L + lambda0)^{-1} f>).
double hminus1_norm(const Eigen::VectorXd& f, const EllipticOperator& op);
/// sqrt(<h grad u, grad u>) from the stiffness.
double h01_seminorm(const Eigen::VectorXd& u, const EllipticOperator& op);
double l2_norm(const Eigen::VectorXd& f, const EllipticOperator& op);

/// 0.5 h_min / sqrt(max eigenvalue of h).
double default_time_step(const EllipticOperator& op);
/// Largest step for which leapfrog on the stiffness is stable.
double stability_limit(const EllipticOperator& op);

/// Coefficient vectors of the lower-order terms at one time.
struct LowerOrderSnapshot {
    bool active = false;
    Eigen::VectorXd q, q2;
    std::array<Eigen::VectorXd, 2> q1;
};

LowerOrderSnapshot snapshot(const LowerOrderTerms& lot, const EllipticOperator& op, double t);

/// Leapfrog for several trajectories at once (one per column).
///
/// (w+ - 2w + w-)/dt^2 = -L w + q w + q1 . D w + q2 (w+ - w-)/(2 dt),
/// with the coefficients taken at the centre of the two-step stencil.
class WaveStepper {
public:
    WaveStepper(EllipticPtr op, double dt);

    /// Second-order Taylor start: w1 = w0 + dt v0 + dt^2/2 a(w0, v0).
    void start(const Eigen::MatrixXd& w0, const Eigen::MatrixXd& v0, const LowerOrderSnapshot& at0);
    /// Advances from step n to n + 1 using coefficients at t_n.
    void advance(const LowerOrderSnapshot& at_n);

    int step() const { return step_; }
    double time() const { return step_ * dt_; }
    double dt() const { return dt_; }
    const Eigen::MatrixXd& current() const { return cur_; }
    const Eigen::MatrixXd& previous() const { return prev_; }

private:
    Eigen::MatrixXd accel(const Eigen::MatrixXd& w, const Eigen::MatrixXd& v, const LowerOrderSnapshot& c) const;
    void guard() const;

    EllipticPtr op_;
    double dt_;
    int step_ = 0;
    Eigen::MatrixXd prev_, cur_;
};

struct WaveTrajectory {
    EllipticPtr op;
    double dt = 0.0;
    double T = 0.0;
    double r = 0.0;
    std::vector<double> times;            ///< t_n = n dt, n = 0..N
    std::vector<Eigen::VectorXd> w;       ///< dof values at t_n
    std::vector<Eigen::VectorXd> wt;      ///< centred velocity at t_n
    std::vector<double> energy;           ///< E(t_n)
    std::vector<double> w_l2;
    std::vector<double> wt_hm1;

    std::size_t steps() const { return times.size(); }
};

/// Steps so that T is hit exactly with dt no larger than `dt_max`, optionally
/// a multiple of 2 * align so that midpoints of `align` time cells are steps.
int step_count(double T, double dt_max, int align = 0);

/// Integrates to T (one extra step feeds the final centred velocity).
/// dt <= 0 selects the default step. Throws PreconditionError when dt
/// violates the stability limit, NumericalError when max|w| exceeds 1e12.
WaveTrajectory simulate_wave(const Eigen::VectorXd& w0, const Eigen::VectorXd& w1, const LowerOrderTerms& lot,
                             double T, EllipticPtr op, double dt = 0.0);

/// E at a time node of the trajectory; PreconditionError off the grid.
double energy(const WaveTrajectory& traj, double t);

struct EnergyBound {
    double fitted_C = 0.0;
    double t = 0.0;  ///< time of the largest energy
    double s = 0.0;  ///< time of the smallest energy
};

/// fitted_C = max_{t,s} log(E(t)/E(s)) / (1 + r).
EnergyBound check_energy_bound(const WaveTrajectory& traj, double r);

struct TimeWindows {
    double S1 = 0.0, S2 = 0.0, T2 = 0.0, T1 = 0.0;
};

/// int_{S2}^{T2} E / [(1 + r^2) int_{S1}^{T1} |w|^2], trapezoid in time.
double check_integral_bound(const WaveTrajectory& traj, const TimeWindows& win, double r);

/// Header "WOBSTRJ1", dim, nodes per axis, spacings, lower corner, dt, step
/// count; then one row-major lattice of doubles per step.
void write_trajectory(const std::string& path, const WaveTrajectory& traj);
void write_energy_csv(const std::string& path, const WaveTrajectory& traj);

}  // namespace wobs

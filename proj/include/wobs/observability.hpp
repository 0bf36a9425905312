#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wobs/region.hpp"
#include "wobs/waveop.hpp"
#include "wobs/weight.hpp"

namespace wobs {

/// Dirichlet eigenpairs of the discrete -L, L2-orthonormal on the grid.
struct InitialDataBasis {
    EllipticPtr op;
    int m = 0;
    Eigen::VectorXd mu;      ///< ascending
    Eigen::MatrixXd modes;   ///< dofs x m

    /// 2m data: (e_i, 0) for i < m, then (0, e_i).
    Eigen::MatrixXd displacements() const;
    Eigen::MatrixXd velocities() const;
};

/// Throws PreconditionError when m exceeds the interior node count or is < 1.
InitialDataBasis build_basis(EllipticPtr op, int m);

struct GramianConfig {
    int threads = 1;
    double dt = 0.0;  ///< <= 0 selects the default step
};

struct Gramian {
    std::vector<Eigen::MatrixXd> G;  ///< one per region
    std::vector<Eigen::MatrixXd> R;  ///< triangular factors with R^T R = G
    std::vector<std::size_t> samples;  ///< observed (t, x) samples per region
    Eigen::MatrixXd M;
    double dt = 0.0;
    int steps = 0;
};

/// G_ab = int_K w_a w_b over each region and M_ab = <w0_a, w0_b> + <w1_a, w1_b>_{H^-1}.
///
/// Columns of w0/w1 are the data. Every region must live on the operator's
/// grid with a common (t, x) time axis whose nodes fall on solver steps; the
/// step is chosen so that midpoint time nodes are hit exactly. Trajectories
/// are split into column blocks across threads; one thread folds the observed
/// samples into a QR factor of the observation matrix, so small pencil
/// eigenvalues stay resolvable below the round-off level of G itself.
Gramian assemble_gramian(const Eigen::MatrixXd& w0, const Eigen::MatrixXd& w1, const LowerOrderTerms& lot,
                         const std::vector<const SpaceTimeRegion*>& regions, double T, EllipticPtr op,
                         const GramianConfig& cfg = {});

Gramian assemble_gramian(const InitialDataBasis& basis, const LowerOrderTerms& lot,
                         const std::vector<const SpaceTimeRegion*>& regions, double T, const GramianConfig& cfg = {});

struct PencilEstimate {
    double mu_min = 0.0;
    double C_obs = 0.0;      ///< +inf when not observable
    bool observable = false;
    Eigen::VectorXd spectrum;  ///< ascending eigenvalues of M^{-1/2} G M^{-T/2}
    /// Round-off floor of mu_min, (eps sigma_max sqrt(samples))^2 in the
    /// factored form; values below it carry no digits.
    double resolution = 0.0;
    bool resolved() const { return mu_min > resolution; }
};

/// Smallest eigenvalue of the pencil (G, M) by Cholesky whitening of M.
/// mu_min below 1e-12 trace is reported as non-observable.
PencilEstimate estimate_constant(const Eigen::MatrixXd& G, const Eigen::MatrixXd& M);
/// Same pencil from a factor R with G = R^T R, via singular values of R L^{-T}.
PencilEstimate estimate_constant_factored(const Eigen::MatrixXd& R, const Eigen::MatrixXd& M,
                                          std::size_t samples = 1);

struct TheoreticalConstant {
    double value = 0.0;      ///< +inf when it overflows
    double log_value = 0.0;  ///< log(fitC) + exp(fitC r)
    bool overflow = false;
};

/// fitC exp(exp(fitC r)).
TheoreticalConstant theoretical_constant(double r, double fitC);

/// Smallest fitC for which fitC exp(exp(fitC r)) dominates every sampled C_obs(r).
double fit_theoretical_constant(const std::vector<double>& r, const std::vector<double>& C_obs);

struct ObservabilityReport {
    std::string region;
    double T = 0.0;
    int m = 0;
    double mu_min = 0.0;
    double resolution = 0.0;
    double C_obs = 0.0;
    bool observable = false;
    double measure = 0.0;
    double r = 0.0;
    double fitC = 0.0;
    TheoreticalConstant theoretical;
    bool refinement_checked = false;
    bool refinement_stable = false;
};

struct RegionComparison {
    std::vector<ObservabilityReport> rows;
    bool first_inside_second = false;   ///< K subset of K1, node-exact
    bool first_smaller = false;         ///< measure(K) < measure(K1)
    bool loewner_ordered = false;       ///< G(K1) - G(K) PSD
    bool constant_ordered = false;      ///< C_obs(K) >= C_obs(K1)
    double min_difference_eigenvalue = 0.0;
};

/// Reports for every region from one shared set of trajectories. The first two
/// regions are compared as K and K1.
RegionComparison compare_regions(const InitialDataBasis& basis, const LowerOrderTerms& lot, double T,
                                 const std::vector<const SpaceTimeRegion*>& regions, const GramianConfig& cfg = {});

void write_comparison_csv(const std::string& path, const RegionComparison& cmp);

}  // namespace wobs

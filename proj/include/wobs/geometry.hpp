#pragma once

#include <string>
#include <vector>

#include "wobs/coefficients.hpp"
#include "wobs/grid.hpp"
#include "wobs/region.hpp"
#include "wobs/weight.hpp"

namespace wobs {

/// Subset of the boundary, as indices into Grid::boundary().
using BoundarySet = std::vector<std::size_t>;

/// Boundary points where the conormal derivative of d is positive.
BoundarySet compute_gamma0(const CoefficientField& h, const WeightField& d, const Grid& g);

/// Open distance neighborhood of a boundary set, intersected with Omega.
struct Neighborhood {
    NodeMask mask;
    std::vector<Point> anchors;  ///< the boundary points the distance is measured from
    double radius = 0.0;         ///< zero for a mask supplied without a distance description
};

Neighborhood neighborhood(const BoundarySet& gamma, double radius, const Grid& g);
/// Wraps an arbitrary node mask; its closed complement is taken from the lattice.
Neighborhood neighborhood_from_mask(NodeMask mask);

struct Neighborhoods {
    Neighborhood omega;
    Neighborhood omega0;
};

/// omega = O_delta(gamma0) and omega0 = O_delta0(gamma0), both inside Omega.
Neighborhoods build_neighborhoods(const BoundarySet& gamma0, double delta, double delta0, const Grid& g);

/// Sample points of the closure of Omega minus omega: inside nodes outside
/// the mask, boundary points at distance >= radius from the anchors, and in
/// one dimension the exact endpoints anchor +- radius.
std::vector<Point> closed_complement(const Neighborhood& omega, const Grid& g);

struct Times {
    double R0 = 0.0;
    double R1 = 0.0;
    double Tstar = 0.0;
};

Times compute_times(const WeightField& d, const Neighborhood& omega, const Grid& g);

/// Everything the Carleman argument selects, plus the neighborhood radii.
struct CarlemanParameters {
    double T = 0.0;
    double alpha = 0.0;
    double c = 0.0;
    std::array<double, 4> eps_ladder{};  ///< eps0 < eps1 < eps2 < eps3 < 1/2
    double eps = 0.0;                    ///< level margin in Q(c + eps), Q(c + 2 eps)
    double delta = 0.0;
    double delta0 = 0.0;
    double delta1 = 0.0;  ///< half-width of the observation time slab as a fraction of T
    double omega1_radius = 0.0;
    double omega2_radius = 0.0;
    double R0 = 0.0;
    Point zeta{0.0, 0.0};

    double window_lo(int i) const { return T / 2 - eps_ladder[i] * T; }
    double window_hi(int i) const { return T / 2 + eps_ladder[i] * T; }
};

struct ObservationRegions {
    SpaceTimeRegion D;
    SpaceTimeRegion K;
    SpaceTimeRegion K1;  ///< the full cylinder (0,T) x omega
};

/// D = {d(x) > (t - T/2)^2} and K = slab x omega0 union (omega \ omega0) cap D,
/// on `nt` midpoint time cells. Uses p.T and p.delta1.
ObservationRegions build_observation_region(const WeightField& d, const CarlemanParameters& p,
                                            const Neighborhoods& nb, const GridPtr& g, int nt);

/// The light-cone comparator (0,T) x omega cut down to |x - x0|^2 > t^2.
SpaceTimeRegion build_light_cone_region(const Point& x0, const ObservationRegions& r);

struct ShiftedRegions {
    BoundarySet gamma0_zeta;
    SpaceTimeRegion Dzeta;
    SpaceTimeRegion Kzeta;
    double R1 = 0.0;
    double Tstar2 = 0.0;
    double delta2 = 0.0;  ///< a radius below delta0 whose neighborhood of gamma0_zeta lies in omega0
};

/// Regions built from x -> d(x + zeta). Throws PreconditionError when the
/// shifted critical point leaves the closed domain and VerificationError when
/// no admissible delta2 exists on the lattice.
ShiftedRegions build_shifted_regions(const WeightField& d, const CarlemanParameters& p, const CoefficientField& h,
                                     const Neighborhoods& nb, const GridPtr& g, int nt);

/// Box dilation of K union K_zeta by physical margins, clipped to (0,T) x Omega.
SpaceTimeRegion observation_envelope(const SpaceTimeRegion& K, const SpaceTimeRegion& Kzeta, double time_margin,
                                     double space_margin);

struct ProofNeighborhoods {
    Neighborhood omega1;
    Neighborhood omega2;
};

/// omega1 and omega2 between omega0 and omega. The equispaced radii are used
/// when d < T^2/4 holds off omega1; otherwise the radii are pushed toward delta.
ProofNeighborhoods build_proof_neighborhoods(const WeightField& d, const BoundarySet& gamma0, double delta,
                                             double delta0, double T, const Grid& g);

struct InclusionCheck {
    std::string name;
    std::size_t violations = 0;
};

struct ChainReport {
    std::vector<InclusionCheck> checks;
    std::size_t nodes = 0;
    bool holds() const;
    std::string describe() const;
};

struct SelectionOptions {
    double delta = 0.3;
    double delta0 = 0.1;
    double delta1 = 0.25;
    double omega1_radius = 0.0;
    double omega2_radius = 0.0;
    double c_margin = 0.05;  ///< c = (1 - c_margin) R0
    double c = 0.0;          ///< explicit level; overrides c_margin when positive
    int nt = 200;
    int ns = 200;
    int max_iterations = 60;
};

/// Chooses c, alpha, the eps ladder and eps, then verifies the inclusion
/// chain node-wise on an nt x ns x (space) lattice over (0,T)^2.
CarlemanParameters select_carleman_parameters(const WeightField& d, double T, const Neighborhood& omega1,
                                              const Grid& g, const SelectionOptions& opt,
                                              ChainReport* report = nullptr);

/// Node-wise check of Q0\Q0' < Q(c+2eps) < Q(c+eps) < Q(c) < D' < Q1\Q1' and
/// (T0,T0')^2 x Omega < D''.
ChainReport check_inclusion_chain(const WeightField& d, const CarlemanParameters& p, const Neighborhood& omega1,
                                  const Grid& g, int nt, int ns);

struct ProofSets {
    SpaceTimeRegion Qb;
    SpaceTimeRegion Dprime;
    SpaceTimeRegion Dsecond;
};

ProofSets build_proof_sets(const WeightField& d, const CarlemanParameters& p, double b, const Neighborhood& omega1,
                           const GridPtr& g, const TimeAxis& t, const TimeAxis& s);

/// Nodes of (D cap (0,T) x (omega\omega0)) union ((T0,T0') x omega2) outside K.
std::size_t window_containment_violations(const CarlemanParameters& p, const Neighborhoods& nb,
                                          const Neighborhood& omega2, const ObservationRegions& r);

struct WaitingTimes {
    double T_new = 0.0;  ///< 2 max over the closed complement of omega of |x - x0|
    double T_old = 0.0;  ///< 2 max over the closed domain of |x - x0|
};

/// Requires a paraboloid weight (known center).
WaitingTimes waiting_time_comparison(const WeightField& d, const Neighborhood& omega, const Grid& g);

}  // namespace wobs

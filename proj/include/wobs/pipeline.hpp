#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wobs/carleman.hpp"
#include "wobs/geometry.hpp"
#include "wobs/observability.hpp"
#include "wobs/scenario.hpp"
#include "wobs/waveop.hpp"

namespace wobs {

/// Geometry of one scenario. Without a shift the weight must be free of
/// critical points: it is normalized, the Carleman parameters are selected
/// and the inclusion chain is verified. With a shift the weight has a single
/// interior critical point at weight.center; it is used as given and the
/// shifted regions and their envelope are built instead.
struct GeometryRun {
    GeometryRun(Scenario s, Setup st) : scenario(std::move(s)), setup(std::move(st)), d(setup.d) {}

    Scenario scenario;
    Setup setup;
    WeightField d;  ///< the weight the regions are built from
    bool shifted_mode = false;

    std::optional<Condition1Result> condition1;
    std::optional<Condition2Result> condition2;
    BoundarySet gamma0;
    Neighborhoods nb;
    Times times;
    double T = 0.0;
    CarlemanParameters params;
    std::optional<ProofNeighborhoods> proof;
    std::optional<ChainReport> chain;
    std::optional<std::size_t> window_violations;
    std::optional<WaitingTimes> waiting;

    std::optional<ObservationRegions> regions;
    std::optional<SpaceTimeRegion> K2;
    std::optional<ShiftedRegions> shifted;
    std::optional<SpaceTimeRegion> W;
    std::size_t envelope_violations = 0;          ///< nodes of K union Kzeta outside W
    std::size_t envelope_closure_violations = 0;  ///< nodes of the closure outside W

    int nt() const { return scenario.grid.time_cells; }
    /// K, K1, then the comparator regions of the mode.
    std::vector<const SpaceTimeRegion*> observation_regions() const;
};

GeometryRun run_geometry(const Scenario& s);

struct IdentityRun {
    std::vector<IdentityRow> rows;
    std::vector<std::pair<std::string, double>> worst;  ///< max relative residual per family and lambda
    double max_relative = 0.0;
};

/// Throws ConfigError in shifted mode.
IdentityRun run_identity(const GeometryRun& geo);
SweepResult run_sweep(const GeometryRun& geo);

struct ObserveRun {
    RegionComparison comparison;
    std::vector<double> r_samples;
    std::vector<double> C_samples;  ///< C_obs(K) per r sample
    std::optional<double> refined_mu_min;
};

ObserveRun run_observe(const GeometryRun& geo, int threads);

struct EnergyDraw {
    std::string description;
    double r = 0.0;
    double fitted_C = 0.0;
    double integral_ratio = 0.0;
};

struct EnergyRun {
    WaveTrajectory free;
    double free_fitted_C = 0.0;
    double free_integral_ratio = 0.0;
    TimeWindows windows;
    std::vector<EnergyDraw> draws;
    double median_fitted_C = 0.0;
    double median_ratio = 0.0;
    double fitted_C_spread = 0.0;  ///< max |x - median| / median
    double ratio_spread = 0.0;
};

EnergyRun run_energy(const GeometryRun& geo);

}  // namespace wobs

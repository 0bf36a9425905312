#include "wobs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace wobs {

namespace {

Point to_point(const std::vector<double>& v) {
    Point p{0.0, 0.0};
    for (std::size_t i = 0; i < v.size() && i < 2; ++i) p[i] = v[i];
    return p;
}

double resolve_T(const Scenario& s, double Tstar) {
    if (!s.time.T) return s.time.T_factor * Tstar;
    if (!(*s.time.T > Tstar))
        throw ConfigError("time.T", fmt::format("T = {} does not exceed the waiting time {}", *s.time.T, Tstar));
    return *s.time.T;
}

void geometry_without_shift(GeometryRun& run) {
    const Scenario& s = run.scenario;
    const Grid& g = *run.setup.grid;
    const auto& h = run.setup.h;
    const Condition1Result c1 = check_condition1(h, run.setup.d, g);
    run.condition1 = c1;
    if (!(c1.mu0 > 0.0) || !(c1.min_grad > 0.0))
        throw VerificationError(fmt::format("the weight fails the pseudoconvexity condition (mu0 = {}, "
                                            "min |grad d| = {})",
                                            c1.mu0, c1.min_grad),
                                {c1.mu0 > 0.0 ? c1.min_grad_node : c1.mu0_node});
    run.d = normalize_weight(run.setup.d, c1.mu0, h, g);
    run.gamma0 = compute_gamma0(h, run.d, g);
    if (run.gamma0.empty()) throw VerificationError("the observed boundary part is empty");
    run.nb = build_neighborhoods(run.gamma0, s.geometry.delta, s.geometry.delta0, g);
    run.times = compute_times(run.d, run.nb.omega, g);
    run.T = resolve_T(s, run.times.Tstar);

    run.proof = build_proof_neighborhoods(run.d, run.gamma0, s.geometry.delta, s.geometry.delta0, run.T, g);
    SelectionOptions opt;
    opt.delta = s.geometry.delta;
    opt.delta0 = s.geometry.delta0;
    opt.delta1 = s.geometry.delta1;
    opt.omega1_radius = run.proof->omega1.radius;
    opt.omega2_radius = run.proof->omega2.radius;
    opt.nt = s.grid.time_cells;
    opt.ns = s.grid.s_cells;
    ChainReport chain;
    run.params = select_carleman_parameters(run.d, run.T, run.proof->omega1, g, opt, &chain);
    run.chain = chain;
    run.params.delta = s.geometry.delta;
    run.params.delta0 = s.geometry.delta0;
    run.params.delta1 = s.geometry.delta1;
    run.params.omega1_radius = run.proof->omega1.radius;
    run.params.omega2_radius = run.proof->omega2.radius;

    run.regions = build_observation_region(run.d, run.params, run.nb, run.setup.grid, s.grid.time_cells);
    run.window_violations = window_containment_violations(run.params, run.nb, run.proof->omega2, *run.regions);
    if (s.weight.kind == "paraboloid") {
        run.K2 = build_light_cone_region(to_point(s.weight.center), *run.regions);
        run.K2->label = "K2";
        run.waiting = waiting_time_comparison(run.d, run.nb.omega, g);
    }
}

void geometry_with_shift(GeometryRun& run) {
    const Scenario& s = run.scenario;
    const Grid& g = *run.setup.grid;
    const auto& h = run.setup.h;
    const Point x0 = to_point(s.weight.center);
    run.condition2 = check_condition2(h, run.setup.d, x0, g);
    if (run.condition2->degenerate)
        throw VerificationError(fmt::format("the critical point at {} is degenerate (s = {})", format_point(x0, g.dim()),
                                            run.condition2->s));
    run.d = run.setup.d;
    run.d.critical_point = x0;
    run.gamma0 = compute_gamma0(h, run.d, g);
    if (run.gamma0.empty()) throw VerificationError("the observed boundary part is empty");
    run.nb = build_neighborhoods(run.gamma0, s.geometry.delta, s.geometry.delta0, g);
    run.times = compute_times(run.d, run.nb.omega, g);

    run.params.zeta = to_point(*s.geometry.zeta);
    const Times tz = compute_times(run.d.shifted(run.params.zeta), run.nb.omega, g);
    run.T = resolve_T(s, 2.0 * std::max(run.times.R1, tz.R1));
    run.params.T = run.T;
    run.params.delta = s.geometry.delta;
    run.params.delta0 = s.geometry.delta0;
    run.params.delta1 = s.geometry.delta1;

    run.regions = build_observation_region(run.d, run.params, run.nb, run.setup.grid, s.grid.time_cells);
    run.shifted = build_shifted_regions(run.d, run.params, h, run.nb, run.setup.grid, s.grid.time_cells);
    const double tm = s.geometry.envelope_time_margin.value_or(run.T / s.grid.time_cells);
    const double sm = s.geometry.envelope_space_margin.value_or(g.max_spacing());
    run.W = observation_envelope(run.regions->K, run.shifted->Kzeta, tm, sm);
    run.W->label = "W";
    const SpaceTimeRegion both = run.regions->K.unite(run.shifted->Kzeta);
    run.envelope_violations = both.violations_of_subset(*run.W);
    run.envelope_closure_violations = both.dilate(1, 1).violations_of_subset(*run.W);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double spread(const std::vector<double>& v, double m) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x - m) / std::abs(m));
    return worst;
}

TestFunction draw_family(const std::string& family, int n, double T, const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (family == "polynomial") return TestFunction::random_polynomial(n, 4, rng);
    const auto& bb = g.domain();
    FrameVec k{}, phase{}, width{};
    FramePoint center{};
    for (int a = 0; a < 2 + n; ++a) {
        k[a] = 0.5 + 2.5 * unit(rng);
        phase[a] = 2 * M_PI * unit(rng);
        width[a] = 0.3 + 0.4 * unit(rng);
    }
    center[0] = T * unit(rng);
    center[1] = T * unit(rng);
    for (int j = 0; j < n; ++j) center[2 + j] = bb.lo[j] + (bb.hi[j] - bb.lo[j]) * unit(rng);
    if (family == "trigonometric") return TestFunction::trigonometric(n, k, phase);
    return TestFunction::gaussian(n, center, width);
}

void require_unshifted(const GeometryRun& geo, const char* what) {
    if (geo.shifted_mode)
        throw ConfigError("geometry.zeta", fmt::format("{} needs a weight without critical points", what));
}

}  // namespace

std::vector<const SpaceTimeRegion*> GeometryRun::observation_regions() const {
    std::vector<const SpaceTimeRegion*> out{&regions->K, &regions->K1};
    if (K2) out.push_back(&*K2);
    if (shifted) out.push_back(&shifted->Kzeta);
    if (W) out.push_back(&*W);
    return out;
}

GeometryRun run_geometry(const Scenario& s) {
    GeometryRun run(s, materialize(s));
    run.shifted_mode = s.geometry.zeta.has_value();
    if (run.shifted_mode)
        geometry_with_shift(run);
    else
        geometry_without_shift(run);
    return run;
}

IdentityRun run_identity(const GeometryRun& geo) {
    require_unshifted(geo, "the identity check");
    const Scenario& s = geo.scenario;
    const Grid& g = *geo.setup.grid;
    const int n = g.dim();
    std::mt19937_64 rng(s.seed);
    IdentityRun out;
    for (const auto& family : s.carleman.families) {
        const TestFunction u = draw_family(family, n, geo.T, g, rng);
        const auto points = sample_box(geo.params, g, static_cast<std::size_t>(s.carleman.identity_points), rng);
        for (double lambda : s.carleman.identity_lambdas) {
            const PsiFunction psi = step3_psi(lambda, geo.params.alpha, geo.setup.h, geo.d);
            const std::string label = fmt::format("{}@lambda={}", family, lambda);
            double worst = 0.0;
            for (const auto& z : points) {
                const IdentityResult r = check_identity(u, z, lambda, geo.params, geo.d, geo.setup.h, psi);
                out.rows.push_back({label, z, r.residual, r.largest});
                worst = std::max(worst, std::abs(r.relative));
            }
            out.worst.emplace_back(label, worst);
            out.max_relative = std::max(out.max_relative, worst);
        }
    }
    return out;
}

SweepResult run_sweep(const GeometryRun& geo) {
    require_unshifted(geo, "the large-parameter sweep");
    const Scenario& s = geo.scenario;
    const Grid& g = *geo.setup.grid;
    std::mt19937_64 rng(s.seed);
    const auto points =
        sample_level_set(geo.d, geo.params, geo.proof->omega1, g, static_cast<std::size_t>(s.carleman.sweep_points), rng);
    const TestFunction u = TestFunction::sine_bump(g.domain(), geo.T, s.carleman.bump_width);
    const double h0 = verify_coefficients(geo.setup.h, g).h0;
    return check_pointwise_inequality(u, s.carleman.lambdas, points, geo.params, geo.d, geo.setup.h, h0);
}

ObserveRun run_observe(const GeometryRun& geo, int threads) {
    const Scenario& s = geo.scenario;
    const Grid& g = *geo.setup.grid;
    GramianConfig cfg;
    cfg.threads = threads;
    const EllipticPtr op = assemble_elliptic(geo.setup.h, geo.setup.grid, 0.0);
    const InitialDataBasis basis = build_basis(op, s.observability.modes);
    LowerOrderTerms lot = geo.setup.lot;
    lot.compute_r(g, geo.T);

    ObserveRun out;
    out.comparison = compare_regions(basis, lot, geo.T, geo.observation_regions(), cfg);
    auto& rows = out.comparison.rows;

    out.r_samples = s.observability.r_samples;
    if (out.r_samples.empty()) {
        out.r_samples = {lot.r()};
        out.C_samples = {rows[0].C_obs};
    } else {
        std::mt19937_64 rng(s.seed);
        const std::vector<const SpaceTimeRegion*> K{&geo.regions->K};
        for (double r : out.r_samples) {
            const LowerOrderTerms draw = r > 0.0 ? LowerOrderTerms::random(g, geo.T, r, rng) : LowerOrderTerms::zero(g.dim());
            const Gramian gr = assemble_gramian(basis, draw, K, geo.T, cfg);
            out.C_samples.push_back(estimate_constant_factored(gr.R[0], gr.M, gr.samples[0]).C_obs);
        }
    }
    const double fitC = fit_theoretical_constant(out.r_samples, out.C_samples);
    for (auto& row : rows) {
        row.fitC = fitC;
        row.theoretical = theoretical_constant(row.r, fitC);
    }

    if (s.observability.refine) {
        Scenario fine = s;
        for (auto& c : fine.grid.cells) c *= 2;
        fine.grid.time_cells *= 2;
        fine.observability.modes *= 2;
        fine.time.T = geo.T;
        fine.time.T_factor = s.time.T_factor;
        const GeometryRun fg = run_geometry(fine);
        const EllipticPtr fop = assemble_elliptic(fg.setup.h, fg.setup.grid, 0.0);
        const InitialDataBasis fb = build_basis(fop, fine.observability.modes);
        LowerOrderTerms flot = fg.setup.lot;
        flot.compute_r(*fg.setup.grid, fg.T);
        const std::vector<const SpaceTimeRegion*> K{&fg.regions->K};
        const Gramian gr = assemble_gramian(fb, flot, K, fg.T, cfg);
        const PencilEstimate est = estimate_constant_factored(gr.R[0], gr.M, gr.samples[0]);
        out.refined_mu_min = est.mu_min;
        auto& k = rows[0];
        k.refinement_checked = true;
        k.refinement_stable = k.mu_min > k.resolution && est.resolved() &&
                              std::abs(est.mu_min - k.mu_min) <= 0.2 * k.mu_min;
    }
    return out;
}

EnergyRun run_energy(const GeometryRun& geo) {
    const Scenario& s = geo.scenario;
    const Grid& g = *geo.setup.grid;
    const EllipticPtr op = assemble_elliptic(geo.setup.h, geo.setup.grid, 0.0);
    const Expression e0 = Expression::parse(s.energy.w0);
    const Expression e1 = Expression::parse(s.energy.w1);
    const Eigen::VectorXd w0 = op->sample([&](const Point& x) { return e0.value(0.0, x); });
    const Eigen::VectorXd w1 = op->sample([&](const Point& x) { return e1.value(0.0, x); });

    EnergyRun out;
    const auto& f = s.energy.windows;
    out.windows = {f[0] * geo.T, f[1] * geo.T, f[2] * geo.T, f[3] * geo.T};

    LowerOrderTerms lot = geo.setup.lot;
    lot.compute_r(g, geo.T);
    out.free = simulate_wave(w0, w1, lot, geo.T, op);
    out.free_fitted_C = check_energy_bound(out.free, lot.r()).fitted_C;
    out.free_integral_ratio = check_integral_bound(out.free, out.windows, lot.r());

    std::mt19937_64 rng(s.seed);
    std::vector<double> fits, ratios;
    for (int i = 0; i < s.energy.draws; ++i) {
        const LowerOrderTerms draw = LowerOrderTerms::random(g, geo.T, s.energy.r, rng);
        const WaveTrajectory traj = simulate_wave(w0, w1, draw, geo.T, op);
        EnergyDraw row{draw.description(), draw.r(), check_energy_bound(traj, draw.r()).fitted_C,
                       check_integral_bound(traj, out.windows, draw.r())};
        fits.push_back(row.fitted_C);
        ratios.push_back(row.integral_ratio);
        out.draws.push_back(std::move(row));
    }
    if (!fits.empty()) {
        out.median_fitted_C = median(fits);
        out.median_ratio = median(ratios);
        out.fitted_C_spread = spread(fits, out.median_fitted_C);
        out.ratio_spread = spread(ratios, out.median_ratio);
    }
    return out;
}

}  // namespace wobs

#include "wobs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "wobs/pipeline.hpp"
#include "wobs/region_io.hpp"

namespace wobs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string scenario;
    std::string out;
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

Scenario resolve(const Options& o) {
    Scenario s = load_scenario(o.scenario);
    if (!o.out.empty()) s.output = o.out;
    if (o.seed) s.seed = *o.seed;
    return s;
}

std::string prepare(const Scenario& s) {
    fs::create_directories(s.output);
    return s.output;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

json number(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }

json point_json(const Point& p, int n) {
    json a = json::array();
    for (int i = 0; i < n; ++i) a.push_back(p[i]);
    return a;
}

json summary_head(const std::string& command, const GeometryRun& geo) {
    return {{"command", command},
            {"scenario", to_json(geo.scenario)},
            {"mode", geo.shifted_mode ? "interior-critical-point" : "no-critical-point"},
            {"T", geo.T}};
}

void write_summary(const std::string& dir, const json& j) {
    std::ofstream out(path_in(dir, "summary.json"));
    if (!out) throw Error("cannot write " + path_in(dir, "summary.json"));
    out << j.dump(2) << "\n";
}

void write_region(const std::string& dir, const SpaceTimeRegion& r) {
    write_pgm(path_in(dir, r.label + ".pgm"), r);
    write_region_csv(path_in(dir, r.label + ".csv"), r);
}

json region_json(const SpaceTimeRegion& r) { return {{"nodes", r.count()}, {"measure", r.measure()}}; }

int cmd_regions(const Options& o) {
    const GeometryRun geo = run_geometry(resolve(o));
    const std::string dir = prepare(geo.scenario);
    const Grid& g = *geo.setup.grid;
    const int n = g.dim();
    json j = summary_head("regions", geo);

    json gamma = json::array();
    for (std::size_t b : geo.gamma0) gamma.push_back(point_json(g.boundary()[b].point, n));
    j["gamma0"] = gamma;
    j["times"] = {{"R0", geo.times.R0}, {"R1", geo.times.R1}, {"Tstar", geo.times.Tstar}};
    j["neighborhoods"] = {{"omega_nodes", geo.nb.omega.mask.count()}, {"omega0_nodes", geo.nb.omega0.mask.count()}};
    write_pgm(path_in(dir, "omega.pgm"), geo.nb.omega.mask, g);
    write_pgm(path_in(dir, "omega0.pgm"), geo.nb.omega0.mask, g);

    const auto& R = *geo.regions;
    for (const SpaceTimeRegion* r : {&R.D, &R.K, &R.K1}) write_region(dir, *r);
    json regions = {{"D", region_json(R.D)}, {"K", region_json(R.K)}, {"K1", region_json(R.K1)}};
    j["K_subset_K1"] = R.K.subset_of(R.K1);
    j["K_to_K1_measure_ratio"] = R.K.measure() / R.K1.measure();

    bool verified = true;
    std::vector<std::string> failures;
    if (geo.condition1) {
        j["condition"] = {{"mu0", geo.condition1->mu0}, {"min_grad", geo.condition1->min_grad}};
        j["normalization"] = {{"scale", geo.d.scale()}, {"offset", geo.d.offset()}};
        const auto& p = geo.params;
        j["parameters"] = {{"c", p.c},         {"alpha", p.alpha},          {"eps", p.eps},
                           {"eps_ladder", p.eps_ladder}, {"delta", p.delta}, {"delta0", p.delta0},
                           {"delta1", p.delta1},         {"omega1_radius", p.omega1_radius},
                           {"omega2_radius", p.omega2_radius}};
        json checks = json::array();
        for (const auto& c : geo.chain->checks) checks.push_back({{"inclusion", c.name}, {"violations", c.violations}});
        j["chain"] = {{"nodes", geo.chain->nodes}, {"holds", geo.chain->holds()}, {"checks", checks}};
        j["window_containment_violations"] = *geo.window_violations;
        if (!geo.chain->holds()) failures.push_back(geo.chain->describe());
        if (*geo.window_violations) failures.push_back(fmt::format("{} window nodes lie outside K", *geo.window_violations));
    }
    if (geo.K2) {
        write_region(dir, *geo.K2);
        regions["K2"] = region_json(*geo.K2);
    }
    if (geo.waiting) j["waiting_times"] = {{"T_new", geo.waiting->T_new}, {"T_old", geo.waiting->T_old}};
    if (geo.shifted) {
        const auto& sh = *geo.shifted;
        const auto& c2 = *geo.condition2;
        j["condition"] = {{"mu0", c2.mu0}, {"s", c2.s}, {"order", number(c2.order)}, {"quotients", c2.quotients}};
        json gz = json::array();
        for (std::size_t b : sh.gamma0_zeta) gz.push_back(point_json(g.boundary()[b].point, n));
        j["shift"] = {{"zeta", point_json(geo.params.zeta, n)},
                      {"gamma0_zeta", gz},
                      {"R1", sh.R1},
                      {"Tstar", sh.Tstar2},
                      {"delta2", sh.delta2}};
        for (const SpaceTimeRegion* r : {&sh.Dzeta, &sh.Kzeta, &*geo.W}) write_region(dir, *r);
        regions["Dzeta"] = region_json(sh.Dzeta);
        regions["Kzeta"] = region_json(sh.Kzeta);
        regions["W"] = region_json(*geo.W);
        j["envelope"] = {{"violations", geo.envelope_violations},
                         {"closure_violations", geo.envelope_closure_violations}};
        if (geo.envelope_violations || geo.envelope_closure_violations)
            failures.push_back("the envelope misses nodes of K or Kzeta");
    }
    j["regions"] = regions;
    verified = failures.empty();
    j["verified"] = verified;
    j["failures"] = failures;
    write_summary(dir, j);

    const double Tstar = geo.shifted ? geo.shifted->Tstar2 : geo.times.Tstar;
    std::cout << fmt::format("T = {:.6g}, T* = {:.6g}, |K| / |K1| = {:.4f}\n", geo.T, Tstar,
                             R.K.measure() / R.K1.measure());
    for (const auto& f : failures) std::cerr << "verification failed: " << f << "\n";
    return verified ? kExitOk : kExitVerification;
}

int cmd_identity(const Options& o) {
    const GeometryRun geo = run_geometry(resolve(o));
    const std::string dir = prepare(geo.scenario);
    const IdentityRun id = run_identity(geo);
    write_identity_csv(path_in(dir, "identity.csv"), id.rows, geo.setup.grid->dim());
    json j = summary_head("identity", geo);
    json worst = json::object();
    for (const auto& [label, v] : id.worst) worst[label] = v;
    const bool ok = id.max_relative <= 1e-6;
    j["max_relative_residual"] = id.max_relative;
    j["worst_by_family"] = worst;
    j["points"] = id.rows.size();
    j["verified"] = ok;
    write_summary(dir, j);
    std::cout << fmt::format("{} evaluations, max relative residual {:.3e}\n", id.rows.size(), id.max_relative);
    if (!ok) std::cerr << "verification failed: the identity residual exceeds 1e-6 of the largest summand\n";
    return ok ? kExitOk : kExitVerification;
}

int cmd_sweep(const Options& o) {
    const GeometryRun geo = run_geometry(resolve(o));
    const std::string dir = prepare(geo.scenario);
    const SweepResult sw = run_sweep(geo);
    write_sweep_csv(path_in(dir, "sweep.csv"), sw, geo.setup.grid->dim());
    json j = summary_head("sweep", geo);
    json rows = json::array();
    for (const auto& r : sw.rows)
        rows.push_back({{"lambda", r.lambda}, {"min_relative_margin", r.min_relative}, {"nonnegative", r.nonnegative}});
    j["rows"] = rows;
    j["lambda0"] = sw.lambda0;
    j["verified"] = sw.found;
    write_summary(dir, j);
    std::cout << fmt::format("lambda0 = {}\n", sw.lambda0);
    return sw.found ? kExitOk : kExitVerification;
}

int cmd_observe(const Options& o) {
    const GeometryRun geo = run_geometry(resolve(o));
    const std::string dir = prepare(geo.scenario);
    const ObserveRun ob = run_observe(geo, o.threads);
    const auto& cmp = ob.comparison;
    write_comparison_csv(path_in(dir, "observability.csv"), cmp);
    json j = summary_head("observe", geo);
    json rows = json::array();
    for (const auto& r : cmp.rows)
        rows.push_back({{"region", r.region},
                        {"measure", r.measure},
                        {"mu_min", r.mu_min},
                        {"mu_resolution", r.resolution},
                        {"resolved", r.mu_min > r.resolution},
                        {"C_obs", number(r.C_obs)},
                        {"observable", r.observable},
                        {"r", r.r}});
    j["rows"] = rows;
    j["K_subset_K1"] = cmp.first_inside_second;
    j["K_smaller_than_K1"] = cmp.first_smaller;
    j["loewner_ordered"] = cmp.loewner_ordered;
    j["constant_ordered"] = cmp.constant_ordered;
    j["min_difference_eigenvalue"] = cmp.min_difference_eigenvalue;
    json fit = {{"r_samples", ob.r_samples}, {"fitC", cmp.rows[0].fitC}};
    json cs = json::array();
    for (double c : ob.C_samples) cs.push_back(number(c));
    fit["C_obs"] = cs;
    j["theoretical_form"] = fit;
    if (ob.refined_mu_min) {
        j["refinement"] = {{"mu_min_coarse", cmp.rows[0].mu_min},
                           {"mu_min_fine", *ob.refined_mu_min},
                           {"stable", cmp.rows[0].refinement_stable}};
    }
    write_summary(dir, j);
    for (const auto& r : cmp.rows)
        std::cout << fmt::format("{:>6}: mu_min = {:.6e} (floor {:.1e}), C_obs = {:.6g}\n", r.region, r.mu_min,
                                 r.resolution, r.C_obs);
    return kExitOk;
}

int cmd_energy(const Options& o) {
    const GeometryRun geo = run_geometry(resolve(o));
    const std::string dir = prepare(geo.scenario);
    const EnergyRun en = run_energy(geo);
    write_energy_csv(path_in(dir, "energy.csv"), en.free);
    write_trajectory(path_in(dir, "trajectory.bin"), en.free);
    {
        std::ofstream out(path_in(dir, "energy_draws.csv"));
        if (!out) throw Error("cannot write " + path_in(dir, "energy_draws.csv"));
        out << "# schema: wobs-energy-draws-v1\n";
        out << "draw,r,fitted_C,integral_ratio\n";
        for (std::size_t i = 0; i < en.draws.size(); ++i)
            out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, en.draws[i].r, en.draws[i].fitted_C,
                               en.draws[i].integral_ratio);
    }
    json j = summary_head("energy", geo);
    j["dt"] = en.free.dt;
    j["steps"] = en.free.steps();
    j["windows"] = {{"S1", en.windows.S1}, {"S2", en.windows.S2}, {"T2", en.windows.T2}, {"T1", en.windows.T1}};
    j["scenario_terms"] = {{"r", en.free.r}, {"fitted_C", en.free_fitted_C}, {"integral_ratio", en.free_integral_ratio}};
    json draws = json::array();
    for (const auto& d : en.draws)
        draws.push_back({{"terms", d.description},
                         {"r", d.r},
                         {"fitted_C", d.fitted_C},
                         {"integral_ratio", d.integral_ratio}});
    j["draws"] = draws;
    if (!en.draws.empty()) {
        j["median_fitted_C"] = en.median_fitted_C;
        j["median_integral_ratio"] = en.median_ratio;
        j["fitted_C_spread"] = en.fitted_C_spread;
        j["integral_ratio_spread"] = en.ratio_spread;
    }
    write_summary(dir, j);
    std::cout << fmt::format("fitted C = {:.4g}, integral ratio = {:.4g}", en.free_fitted_C, en.free_integral_ratio);
    if (!en.draws.empty())
        std::cout << fmt::format(", {} draws: median fitted C = {:.4g} (spread {:.0f}%)", en.draws.size(),
                                 en.median_fitted_C, 100 * en.fitted_C_spread);
    std::cout << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Observability regions and constants for wave equations"};
    app.require_subcommand(1);
    Options o;
    std::function<int(const Options&)> action;

    auto add = [&](const std::string& name, const std::string& help, int (*fn)(const Options&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--scenario", o.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (overrides the scenario)");
        sub->add_option("--seed", o.seed, "random seed (overrides the scenario)");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->callback([&action, fn] { action = fn; });
    };
    add("regions", "build and verify the observation regions", cmd_regions);
    add("identity", "check the pointwise weighted identity at random points", cmd_identity);
    add("sweep", "find the smallest large parameter for the pointwise inequality", cmd_sweep);
    add("observe", "estimate observability constants on the regions", cmd_observe);
    add("energy", "integrate the wave equation and check the energy bounds", cmd_energy);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    try {
        return action(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return kExitVerification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace wobs

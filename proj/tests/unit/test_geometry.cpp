#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "wobs/geometry.hpp"
#include "wobs/region_io.hpp"

using namespace wobs;

namespace {

struct Reference {
    GridPtr g = make_grid(Domain::interval(0, 1), {200, 0});
    CoefficientField h = CoefficientField::identity(1);
    WeightField d = WeightField::paraboloid({-0.1, 0}, 1);
};

}  // namespace

TEST(Condition1, ParaboloidHasMuFour) {
    Reference r;
    const auto c1 = check_condition1(r.h, r.d, *r.g);
    EXPECT_NEAR(c1.mu0, 4.0, 1e-12);
    EXPECT_NEAR(c1.min_grad, 0.2, 1e-12);

    auto g2 = make_grid(Domain::rectangle({0, 0}, {1, 1}), {32, 32});
    const auto c2 = check_condition1(CoefficientField::identity(2), WeightField::paraboloid({-0.1, -0.1}, 2), *g2);
    EXPECT_NEAR(c2.mu0, 4.0, 1e-12);
}

TEST(Condition1, NormalizationKeepsAnAdmissibleWeight) {
    Reference r;
    const auto c1 = check_condition1(r.h, r.d, *r.g);
    const WeightField dn = normalize_weight(r.d, c1.mu0, r.h, *r.g);
    EXPECT_DOUBLE_EQ(dn.scale(), 1.0);
    EXPECT_DOUBLE_EQ(dn.offset(), 0.0);
}

TEST(Gamma0, OneDimensionalObservedEnd) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    ASSERT_EQ(g0.size(), 1u);
    EXPECT_DOUBLE_EQ(r.g->boundary()[g0[0]].point[0], 1.0);
}

TEST(Gamma0, DiskMatchesOutwardConormalSign) {
    const double R = 1.0;
    auto g = make_grid(Domain::disk({0, 0}, R), {48, 48});
    const Point x0{1.6, 0.4};
    const auto g0 = compute_gamma0(CoefficientField::identity(2), WeightField::paraboloid(x0, 2), *g);
    const std::set<std::size_t> got(g0.begin(), g0.end());
    std::size_t expected = 0;
    for (std::size_t b = 0; b < g->boundary().size(); ++b) {
        const Point p = g->boundary()[b].point;
        // grad d . nu with nu = p / R
        const double conormal = 2 * ((p[0] - x0[0]) * p[0] + (p[1] - x0[1]) * p[1]) / R;
        if (std::abs(conormal) < 1e-9) continue;
        EXPECT_EQ(got.count(b) == 1, conormal > 0) << "boundary point " << b;
        expected += conormal > 0;
    }
    EXPECT_EQ(got.size(), expected);
}

TEST(Times, ReferenceWaitingTimes) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    const auto nb = build_neighborhoods(g0, 0.3, 0.1, *r.g);
    const Times t = compute_times(r.d, nb.omega, *r.g);
    EXPECT_NEAR(t.R0, 0.1, 1e-14);
    EXPECT_NEAR(t.R1, 0.8, 1e-14);
    EXPECT_NEAR(t.Tstar, 1.6, 1e-14);
    const WaitingTimes w = waiting_time_comparison(r.d, nb.omega, *r.g);
    EXPECT_NEAR(w.T_new, 1.6, 1e-12);
    EXPECT_NEAR(w.T_old, 2.2, 1e-12);
}

TEST(Neighborhoods, RejectsInvertedRadii) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    EXPECT_THROW(build_neighborhoods(g0, 0.1, 0.3, *r.g), PreconditionError);
}

// Node counts from tests/oracles/region_oracle.py (exact rational arithmetic).
TEST(Regions, ReferenceCountsMatchOracle) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    const auto nb = build_neighborhoods(g0, 0.3, 0.1, *r.g);
    EXPECT_EQ(nb.omega.mask.count(), 59u);
    EXPECT_EQ(nb.omega0.mask.count(), 19u);
    CarlemanParameters p;
    p.T = 1.1 * 1.6;
    p.delta1 = 0.25;
    const auto reg = build_observation_region(r.d, p, nb, r.g, 200);
    EXPECT_EQ(reg.K.count(), 9762u);
    EXPECT_EQ(reg.K1.count(), 11800u);
    EXPECT_NEAR(reg.K.measure(), 0.429528, 1e-12);
    EXPECT_NEAR(reg.K1.measure(), 0.5192, 1e-12);
    EXPECT_TRUE(reg.K.subset_of(reg.K1));
    const auto k2 = build_light_cone_region({-0.1, 0}, reg);
    EXPECT_EQ(k2.count(), 6368u);
    EXPECT_TRUE(k2.subset_of(reg.K1));
}

TEST(Regions, SetAlgebra) {
    auto g = make_grid(Domain::interval(0, 1), {10, 0});
    const TimeAxis t = TimeAxis::midpoint(1.0, 4);
    SpaceTimeRegion a(g, t), b(g, t);
    a.set(a.index(1, 3));
    a.set(a.index(2, 4));
    b.set(b.index(2, 4));
    a.set(a.index(0, 0));  // node 0 carries the Dirichlet value
    EXPECT_EQ(a.count(), 2u);
    EXPECT_TRUE(b.subset_of(a));
    EXPECT_EQ(a.violations_of_subset(b), 1u);
    EXPECT_EQ(a.minus(b).count(), 1u);
    EXPECT_EQ(a.intersect(b), b);
    EXPECT_EQ(b.dilate(1, 1).count(), 9u);
    EXPECT_NEAR(a.measure(), 2 * 0.25 * 0.1, 1e-15);
}

TEST(Regions, PgmHeaderAndSize) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    const auto nb = build_neighborhoods(g0, 0.3, 0.1, *r.g);
    CarlemanParameters p;
    p.T = 1.76;
    p.delta1 = 0.25;
    const auto reg = build_observation_region(r.d, p, nb, r.g, 50);
    const auto path = std::filesystem::temp_directory_path() / "wobs_test_K.pgm";
    write_pgm(path.string(), reg.K);
    std::ifstream in(path, std::ios::binary);
    std::string magic, comment, dims, maxval;
    std::getline(in, magic);
    std::getline(in, comment);
    std::getline(in, dims);
    std::getline(in, maxval);
    EXPECT_EQ(magic, "P5");
    EXPECT_EQ(comment.rfind("# K", 0), 0u);
    EXPECT_EQ(dims, "201 50");
    EXPECT_EQ(maxval, "255");
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ASSERT_EQ(body.size(), 201u * 50u);
    std::size_t on = 0;
    for (char c : body) on += static_cast<unsigned char>(c) == 255;
    EXPECT_EQ(on, reg.K.count());
    std::filesystem::remove(path);
}

TEST(Condition2, InteriorParaboloidLimitIsFour) {
    auto g1 = make_grid(Domain::interval(0, 1), {200, 0});
    const auto c1 = check_condition2(CoefficientField::identity(1), WeightField::paraboloid({0.5, 0}, 1), {0.5, 0}, *g1);
    EXPECT_NEAR(c1.s, 4.0, 1e-3);
    EXPECT_FALSE(c1.degenerate);

    auto g2 = make_grid(Domain::rectangle({0, 0}, {1, 1}), {40, 40});
    const auto c2 =
        check_condition2(CoefficientField::identity(2), WeightField::paraboloid({0.5, 0.5}, 2), {0.5, 0.5}, *g2);
    EXPECT_NEAR(c2.s, 4.0, 1e-3);
}

TEST(Condition2, SecondCriticalPointIsReported) {
    auto g = make_grid(Domain::interval(0, 1), {100, 0});
    // (x - 0.3)^2 (x - 0.7)^2 = x^4 - 2 x^3 + 1.3 x^2 - 0.42 x + 0.0441
    const Polynomial p(1, {{1.0, {4, 0, 0, 0}}, {-2.0, {3, 0, 0, 0}}, {1.3, {2, 0, 0, 0}}, {-0.42, {1, 0, 0, 0}},
                           {0.0441, {0, 0, 0, 0}}});
    EXPECT_THROW(check_condition2(CoefficientField::identity(1), WeightField::polynomial(p), {0.3, 0}, *g),
                 VerificationError);
}

TEST(ShiftedRegions, ZeroShiftReproducesTheUnshiftedRegions) {
    auto g = make_grid(Domain::interval(0, 1), {200, 0});
    const auto h = CoefficientField::identity(1);
    const auto d = WeightField::paraboloid({0.5, 0}, 1);
    const auto g0 = compute_gamma0(h, d, *g);
    ASSERT_EQ(g0.size(), 2u);
    const auto nb = build_neighborhoods(g0, 0.3, 0.1, *g);
    const Times t = compute_times(d, nb.omega, *g);
    CarlemanParameters p;
    p.T = 1.1 * t.Tstar;
    p.delta1 = 0.25;
    const auto reg = build_observation_region(d, p, nb, g, 100);
    const auto sh = build_shifted_regions(d, p, h, nb, g, 100);
    EXPECT_EQ(sh.Kzeta.mask(), reg.K.mask());
    EXPECT_EQ(sh.Dzeta.mask(), reg.D.mask());
    EXPECT_EQ(sh.R1, t.R1);
    EXPECT_EQ(sh.gamma0_zeta, g0);
}

TEST(ShiftedRegions, EnvelopeContainsTheClosure) {
    auto g = make_grid(Domain::interval(0, 1), {200, 0});
    const auto h = CoefficientField::identity(1);
    const auto d = WeightField::paraboloid({0.5, 0}, 1);
    const auto nb = build_neighborhoods(compute_gamma0(h, d, *g), 0.3, 0.1, *g);
    CarlemanParameters p;
    p.T = 0.55;
    p.delta1 = 0.25;
    p.zeta = {0.05, 0};
    const auto reg = build_observation_region(d, p, nb, g, 100);
    const auto sh = build_shifted_regions(d, p, h, nb, g, 100);
    EXPECT_NEAR(sh.R1, 0.25, 1e-12);
    EXPECT_FALSE(sh.Kzeta.mask() == reg.K.mask());
    const auto W = observation_envelope(reg.K, sh.Kzeta, p.T / 100, g->max_spacing());
    EXPECT_EQ(reg.K.unite(sh.Kzeta).dilate(1, 1).violations_of_subset(W), 0u);
}

TEST(ShiftedRegions, CriticalPointMayNotLeaveTheDomain) {
    auto g = make_grid(Domain::interval(0, 1), {100, 0});
    const auto h = CoefficientField::identity(1);
    const auto d = WeightField::paraboloid({0.5, 0}, 1);
    const auto nb = build_neighborhoods(compute_gamma0(h, d, *g), 0.3, 0.1, *g);
    CarlemanParameters p;
    p.T = 1.0;
    p.delta1 = 0.25;
    p.zeta = {0.7, 0};
    EXPECT_THROW(build_shifted_regions(d, p, h, nb, g, 50), PreconditionError);
}

TEST(Selection, ReferenceChainHolds) {
    Reference r;
    const auto g0 = compute_gamma0(r.h, r.d, *r.g);
    const double T = 1.76;
    const auto pn = build_proof_neighborhoods(r.d, g0, 0.3, 0.1, T, *r.g);
    EXPECT_GT(pn.omega1.radius, 0.1);
    EXPECT_LT(pn.omega1.radius, pn.omega2.radius);
    EXPECT_LT(pn.omega2.radius, 0.3);
    SelectionOptions opt;
    opt.nt = opt.ns = 100;
    ChainReport rep;
    const auto p = select_carleman_parameters(r.d, T, pn.omega1, *r.g, opt, &rep);
    EXPECT_TRUE(rep.holds()) << rep.describe();
    EXPECT_GT(p.alpha, 0.0);
    EXPECT_LT(p.alpha, 1.0);
    EXPECT_LT(p.c, 0.1);
    for (int i = 0; i < 3; ++i) EXPECT_LT(p.eps_ladder[i], p.eps_ladder[i + 1]);
    EXPECT_LT(p.eps_ladder[3], 0.5);
}

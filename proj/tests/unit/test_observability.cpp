#include <gtest/gtest.h>

#include <cmath>

#include "wobs/geometry.hpp"
#include "wobs/observability.hpp"

using namespace wobs;

namespace {

struct Setting {
    GridPtr g = make_grid(Domain::interval(0, 1), {200, 0});
    EllipticPtr op = assemble_elliptic(CoefficientField::identity(1), g, 0.0);
    double T = 1.76;
    int nt = 200;

    SpaceTimeRegion cylinder_over(double a) const {
        NodeMask m(g->node_count());
        for (std::size_t k : g->inside_nodes())
            if (g->coord(k)[0] > a) m.set(k);
        SpaceTimeRegion r = cylinder(g, TimeAxis::midpoint(T, nt), m, 0.0, T);
        r.label = "cyl";
        return r;
    }
};

}  // namespace

TEST(Basis, EigenvaluesApproachTheContinuum) {
    Setting s;
    const auto b = build_basis(s.op, 8);
    ASSERT_EQ(b.mu.size(), 8);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(b.mu[k - 1] / (k * k * M_PI * M_PI), 1.0, 1e-3);
    const Eigen::MatrixXd gram = s.op->cell_volume() * b.modes.transpose() * b.modes;
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(b.modes.col(0).maxCoeff(), 0.0);
    EXPECT_THROW(build_basis(s.op, 0), PreconditionError);
    EXPECT_THROW(build_basis(s.op, 500), PreconditionError);
}

// Continuum values from tests/oracles/gramian_oracle.py.
TEST(Gramian, FirstModeEntriesMatchTheOracle) {
    Setting s;
    const auto b = build_basis(s.op, 1);
    const SpaceTimeRegion cyl = s.cylinder_over(0.7);
    const Gramian gr = assemble_gramian(b, LowerOrderTerms::zero(1), {&cyl}, s.T);
    const Eigen::MatrixXd& G = gr.G[0];
    EXPECT_NEAR(G(0, 0), 0.11638882777782655, 0.005 * 0.116);
    EXPECT_NEAR(G(1, 1), 0.014132403260381007, 0.005 * 0.0141);
    EXPECT_NEAR(G(0, 1), 0.0034513081324365847, 0.005 * 0.00345);
    EXPECT_NEAR(gr.M(0, 0), 1.0, 1e-10);
    EXPECT_NEAR(gr.M(1, 1), 0.10132118364233777, 0.02 * 0.101);
    EXPECT_LE((gr.R[0].transpose() * gr.R[0] - G).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gramian, ThreadsDoNotChangeTheResult) {
    Setting s;
    const auto b = build_basis(s.op, 6);
    const SpaceTimeRegion cyl = s.cylinder_over(0.6);
    GramianConfig one, three;
    three.threads = 3;
    const Gramian a = assemble_gramian(b, LowerOrderTerms::zero(1), {&cyl}, s.T, one);
    const Gramian c = assemble_gramian(b, LowerOrderTerms::zero(1), {&cyl}, s.T, three);
    EXPECT_LE((a.G[0] - c.G[0]).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Gramian, RejectsRegionsOnAnotherGrid) {
    Setting s;
    Setting other;
    other.g = make_grid(Domain::interval(0, 1), {100, 0});
    const auto b = build_basis(s.op, 2);
    const SpaceTimeRegion cyl = other.cylinder_over(0.7);
    EXPECT_THROW(assemble_gramian(b, LowerOrderTerms::zero(1), {&cyl}, s.T), PreconditionError);
}

TEST(Pencil, IdenticalFormsGiveOne) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(5, 5);
    const Eigen::MatrixXd M = A * A.transpose() + 5 * Eigen::MatrixXd::Identity(5, 5);
    const auto est = estimate_constant(M, M);
    EXPECT_NEAR(est.mu_min, 1.0, 1e-12);
    EXPECT_NEAR(est.C_obs, 1.0, 1e-12);
    EXPECT_TRUE(est.observable);

    const Eigen::MatrixXd R = M.llt().matrixU();
    const auto fac = estimate_constant_factored(R, M);
    EXPECT_NEAR(fac.mu_min, 1.0, 1e-12);
}

TEST(Pencil, SingularObservationIsNotObservable) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3, 3);
    G(0, 0) = 1.0;
    G(1, 1) = 2.0;
    const auto est = estimate_constant(G, Eigen::MatrixXd::Identity(3, 3));
    EXPECT_FALSE(est.observable);
    EXPECT_TRUE(std::isinf(est.C_obs));
}

TEST(Pencil, FactoredFormResolvesBelowTheGramFloor) {
    // diag(1, 1e-10) as a factor is diag(1, 1e-20) as a Gramian.
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 2);
    R(0, 0) = 1.0;
    R(1, 1) = 1e-10;
    const auto est = estimate_constant_factored(R, Eigen::MatrixXd::Identity(2, 2));
    EXPECT_NEAR(est.mu_min / 1e-20, 1.0, 1e-6);
    EXPECT_TRUE(est.resolved());
}

TEST(Theoretical, DoubleExponentialForm) {
    EXPECT_NEAR(theoretical_constant(1.0, 1.0).value, std::exp(std::exp(1.0)), 1e-12);
    EXPECT_NEAR(theoretical_constant(1.0, 1.0).value, 15.154262241479262, 1e-10);
    EXPECT_NEAR(theoretical_constant(0.0, 2.0).value, 2.0 * M_E, 1e-12);
    EXPECT_TRUE(theoretical_constant(50.0, 20.0).overflow);
    EXPECT_THROW(theoretical_constant(-1.0, 1.0), PreconditionError);

    const double c = fit_theoretical_constant({0.0, 1.0}, {3.0, 15.0});
    EXPECT_GE(theoretical_constant(0.0, c).value, 3.0 * (1 - 1e-9));
    EXPECT_GE(theoretical_constant(1.0, c).value, 15.0 * (1 - 1e-9));
    EXPECT_LT(theoretical_constant(0.0, 0.999 * c).value, 3.0);
}

TEST(Comparison, ReferenceRegionsAreOrdered) {
    Setting s;
    const auto h = CoefficientField::identity(1);
    const auto d = WeightField::paraboloid({-0.1, 0}, 1);
    const auto nb = build_neighborhoods(compute_gamma0(h, d, *s.g), 0.3, 0.1, *s.g);
    CarlemanParameters p;
    p.T = s.T;
    p.delta1 = 0.25;
    const auto reg = build_observation_region(d, p, nb, s.g, s.nt);
    const auto b = build_basis(s.op, 10);
    const auto cmp = compare_regions(b, LowerOrderTerms::zero(1), s.T, {&reg.K, &reg.K1});
    EXPECT_TRUE(cmp.first_inside_second);
    EXPECT_TRUE(cmp.first_smaller);
    EXPECT_TRUE(cmp.loewner_ordered);
    EXPECT_TRUE(cmp.constant_ordered);
    EXPECT_GT(cmp.rows[0].mu_min, 0.05);
    EXPECT_LE(cmp.rows[0].mu_min, cmp.rows[1].mu_min);
}

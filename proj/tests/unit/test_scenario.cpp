#include <gtest/gtest.h>

#include "wobs/scenario.hpp"

using namespace wobs;
using nlohmann::json;

namespace {

std::string error_path(const json& j) {
    try {
        parse_scenario(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "";
}

}  // namespace

TEST(Scenario, DefaultsDescribeTheReferenceSetting) {
    const Scenario s = parse_scenario(json::object());
    EXPECT_EQ(s.dim(), 1);
    EXPECT_EQ(s.grid.cells, std::vector<int>{200});
    EXPECT_EQ(s.weight.center, std::vector<double>{-0.1});
    EXPECT_DOUBLE_EQ(s.geometry.delta, 0.3);
    EXPECT_DOUBLE_EQ(s.geometry.delta0, 0.1);
    EXPECT_DOUBLE_EQ(s.geometry.delta1, 0.25);
    EXPECT_DOUBLE_EQ(s.time.T_factor, 1.1);
    EXPECT_FALSE(s.time.T.has_value());
    EXPECT_EQ(s.observability.modes, 20);
}

TEST(Scenario, PlanarDefaultsFollowTheDomain) {
    const Scenario s = parse_scenario(json{{"domain", {{"kind", "rectangle"}}}});
    EXPECT_EQ(s.dim(), 2);
    EXPECT_EQ(s.grid.cells.size(), 2u);
    EXPECT_EQ(s.lower_order.q1.size(), 2u);
    EXPECT_EQ(s.weight.center.size(), 2u);
}

TEST(Scenario, RoundTripIsStable) {
    const json in = {{"name", "x"},
                     {"geometry", {{"zeta", {0.05}}}},
                     {"weight", {{"kind", "polynomial"}, {"terms", {{{"coefficient", 1.0}, {"exponents", {2}}}}}}},
                     {"seed", 9}};
    const Scenario s = parse_scenario(in);
    const json out = to_json(s);
    EXPECT_EQ(out["geometry"]["zeta"], json({0.05}));
    EXPECT_EQ(out["seed"], 9);
    EXPECT_TRUE(out["time"]["T"].is_null());
    EXPECT_EQ(to_json(parse_scenario(out)), out);
}

TEST(Scenario, ErrorsNameTheField) {
    EXPECT_EQ(error_path({{"geometry", {{"delta", 0.2}, {"delta0", 0.2}}}}), "geometry.delta0");
    EXPECT_EQ(error_path({{"grid", {{"cells", {6}}}}}), "grid.cells[0]");
    EXPECT_EQ(error_path({{"grid", {{"cells", {100, 100}}}}}), "grid.cells");
    EXPECT_EQ(error_path({{"grid", {{"colls", 3}}}}), "grid.colls");
    EXPECT_EQ(error_path({{"domain", {{"kind", "torus"}}}}), "domain.kind");
    EXPECT_EQ(error_path({{"domain", {{"lo", {1.0}}, {"hi", {0.0}}}}}), "domain.hi[0]");
    EXPECT_EQ(error_path({{"coefficients", {{"kind", "diagonal"}, {"values", {-1.0}}}}}), "coefficients.values[0]");
    EXPECT_EQ(error_path({{"lower_order", {{"q", "sin(x"}}}}), "lower_order.q");
    EXPECT_EQ(error_path({{"time", {{"T_factor", 0.9}}}}), "time.T_factor");
    EXPECT_EQ(error_path({{"energy", {{"windows", {0.5, 0.2, 0.7, 0.9}}}}}), "energy.windows");
    EXPECT_EQ(error_path({{"carleman", {{"families", {"spline"}}}}}), "carleman.families[0]");
    EXPECT_EQ(error_path({{"observability", {{"modes", "many"}}}}), "observability.modes");
    EXPECT_EQ(error_path({{"weight", {{"kind", "polynomial"}, {"terms", {{{"coefficient", 1.0}, {"exponents", {-1}}}}}}}}),
              "weight.terms[0].exponents");
    EXPECT_EQ(error_path({{"seed", -3}}), "seed");
    EXPECT_EQ(error_path(json::array()), "<root>");
}

TEST(Scenario, MaterializeBuildsTheObjects) {
    const Scenario s = parse_scenario({{"grid", {{"cells", {40}}}},
                                       {"coefficients", {{"kind", "diagonal"}, {"values", {2.0}}}},
                                       {"lower_order", {{"q", "1 + x"}}}});
    const wobs::Setup st = materialize(s);
    EXPECT_EQ(st.grid->cells_along(0), 40);
    EXPECT_DOUBLE_EQ(st.h.value({0.5, 0})[0][0], 2.0);
    EXPECT_DOUBLE_EQ(st.d.value({0.4, 0}), 0.25);
    EXPECT_DOUBLE_EQ(st.lot.q(0.0, {0.5, 0}).v, 1.5);
    EXPECT_FALSE(st.lot.vanishes());
}

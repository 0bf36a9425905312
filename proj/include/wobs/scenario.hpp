#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wobs/coefficients.hpp"
#include "wobs/grid.hpp"
#include "wobs/waveop.hpp"
#include "wobs/weight.hpp"

namespace wobs {

struct DomainSpec {
    std::string kind = "interval";  ///< interval | rectangle | disk
    std::vector<double> lo{0.0};
    std::vector<double> hi{1.0};
    std::vector<double> center{0.0, 0.0};
    double radius = 1.0;
};

struct GridSpec {
    std::vector<int> cells{200};
    int time_cells = 200;
    int s_cells = 200;
};

struct CoefficientSpec {
    std::string kind = "identity";  ///< identity | diagonal | perturbed | tabulated
    std::vector<double> values;
    double amplitude = 0.2;
    std::vector<int> cells;
    std::vector<std::vector<double>> entries;
};

struct WeightTermSpec {
    double coefficient = 0.0;
    std::vector<int> exponents;
};

struct WeightSpec {
    std::string kind = "paraboloid";  ///< paraboloid | polynomial
    std::vector<double> center{-0.1};
    std::vector<WeightTermSpec> terms;
};

struct LowerOrderSpec {
    std::string q = "0";
    std::vector<std::string> q1{"0"};
    std::string q2 = "0";
};

struct GeometrySpec {
    double delta = 0.3;
    double delta0 = 0.1;
    double delta1 = 0.25;
    std::optional<std::vector<double>> zeta;
    std::optional<double> envelope_time_margin;   ///< default: one time cell
    std::optional<double> envelope_space_margin;  ///< default: one lattice spacing
};

struct TimeSpec {
    std::optional<double> T;
    double T_factor = 1.1;
};

struct CarlemanSpec {
    std::vector<double> lambdas{1, 2, 5, 10, 20, 50, 100, 200, 500};
    std::vector<double> identity_lambdas{1, 10};
    int identity_points = 1000;
    std::vector<std::string> families{"polynomial", "trigonometric", "gaussian"};
    int sweep_points = 5000;
    double bump_width = 1.0;
};

struct ObservabilitySpec {
    int modes = 20;
    bool refine = false;
    std::vector<double> r_samples;
};

struct EnergySpec {
    std::string w0 = "sin(pi*x) + 0.5*sin(2*pi*x)";
    std::string w1 = "sin(3*pi*x)";
    int draws = 10;
    double r = 2.0;
    std::vector<double> windows{0.05, 0.25, 0.75, 0.95};  ///< S1, S2, T2, T1 as fractions of T
};

struct Scenario {
    std::string name = "scenario";
    DomainSpec domain;
    GridSpec grid;
    CoefficientSpec coefficients;
    WeightSpec weight;
    LowerOrderSpec lower_order;
    GeometrySpec geometry;
    TimeSpec time;
    CarlemanSpec carleman;
    ObservabilitySpec observability;
    EnergySpec energy;
    std::string output = "out";
    std::uint64_t seed = 1;

    int dim() const;
};

/// Throws ConfigError naming the dotted path of the first bad field. Unknown
/// keys are rejected.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
/// Every field, defaults included; unset optionals are null.
nlohmann::json to_json(const Scenario& s);

/// Objects built from a scenario.
struct Setup {
    GridPtr grid;
    CoefficientField h;
    WeightField d;
    LowerOrderTerms lot;
};

Setup materialize(const Scenario& s);

}  // namespace wobs

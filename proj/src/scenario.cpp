#include "wobs/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "wobs/expression.hpp"

namespace wobs {

using nlohmann::json;

namespace {

std::string index_path(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

void read_value(const json& j, const std::string& path, double& out) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    out = j.get<double>();
    if (!std::isfinite(out)) throw ConfigError(path, "must be finite");
}

void read_value(const json& j, const std::string& path, int& out) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(path, "integer out of range");
    out = static_cast<int>(v);
}

void read_value(const json& j, const std::string& path, std::uint64_t& out) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError(path, "expected a non-negative integer");
    out = j.get<std::uint64_t>();
}

void read_value(const json& j, const std::string& path, bool& out) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    out = j.get<bool>();
}

void read_value(const json& j, const std::string& path, std::string& out) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    out = j.get<std::string>();
}

template <class T>
void read_value(const json& j, const std::string& path, std::vector<T>& out) {
    if (!j.is_array()) throw ConfigError(path, "expected an array");
    out.assign(j.size(), T{});
    for (std::size_t i = 0; i < j.size(); ++i) read_value(j[i], index_path(path, i), out[i]);
}

template <class T>
void read_value(const json& j, const std::string& path, std::optional<T>& out) {
    if (j.is_null()) {
        out.reset();
        return;
    }
    T v{};
    read_value(j, path, v);
    out = std::move(v);
}

/// Walks one JSON object, remembering which keys were consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        read_value(*it, at(key), out);
    }

    /// Marks the key as consumed and returns its raw value, if present.
    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void section(const std::string& key, const std::function<void(Reader&)>& body) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        Reader sub(*it, at(key));
        body(sub);
        sub.finish();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

void require_length(const std::vector<double>& v, std::size_t n, const std::string& path) {
    require(v.size() == n, path, fmt::format("expected {} components, got {}", n, v.size()));
}

void check_expression(const std::string& text, const std::string& path) {
    try {
        Expression::parse(text);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

void validate(const Scenario& s) {
    const int n = s.dim();
    const auto& dm = s.domain;
    if (dm.kind == "interval") {
        require_length(dm.lo, 1, "domain.lo");
        require_length(dm.hi, 1, "domain.hi");
    } else if (dm.kind == "rectangle") {
        require_length(dm.lo, 2, "domain.lo");
        require_length(dm.hi, 2, "domain.hi");
    } else if (dm.kind == "disk") {
        require_length(dm.center, 2, "domain.center");
        require(dm.radius > 0, "domain.radius", "must be positive");
    } else {
        throw ConfigError("domain.kind", "expected interval, rectangle or disk, got '" + dm.kind + "'");
    }
    if (dm.kind != "disk")
        for (int i = 0; i < n; ++i)
            require(dm.hi[i] > dm.lo[i], index_path("domain.hi", i), "must exceed domain.lo");

    require(static_cast<int>(s.grid.cells.size()) == n, "grid.cells",
            fmt::format("expected {} entries, got {}", n, s.grid.cells.size()));
    for (int i = 0; i < n; ++i)
        require(s.grid.cells[i] >= 7, index_path("grid.cells", i), "at least 8 nodes per axis are required");
    require(s.grid.time_cells >= 8, "grid.time_cells", "must be at least 8");
    require(s.grid.s_cells >= 8, "grid.s_cells", "must be at least 8");

    const auto& c = s.coefficients;
    if (c.kind == "diagonal") {
        require_length(c.values, n, "coefficients.values");
        for (int i = 0; i < n; ++i) require(c.values[i] > 0, index_path("coefficients.values", i), "must be positive");
    } else if (c.kind == "perturbed") {
        require(c.amplitude >= 0 && c.amplitude < 0.5, "coefficients.amplitude", "must lie in [0, 0.5)");
    } else if (c.kind == "tabulated") {
        require(static_cast<int>(c.cells.size()) == n, "coefficients.cells", "one entry per axis is required");
        std::size_t nodes = 1;
        for (int i = 0; i < n; ++i) {
            require(c.cells[i] >= 1, index_path("coefficients.cells", i), "must be positive");
            nodes *= static_cast<std::size_t>(c.cells[i] + 1);
        }
        const std::size_t fields = n == 1 ? 1 : 3;
        require(c.entries.size() == fields, "coefficients.entries",
                fmt::format("expected {} tables, got {}", fields, c.entries.size()));
        for (std::size_t k = 0; k < fields; ++k)
            require(c.entries[k].size() == nodes, index_path("coefficients.entries", k),
                    fmt::format("expected {} values, got {}", nodes, c.entries[k].size()));
    } else if (c.kind != "identity") {
        throw ConfigError("coefficients.kind",
                          "expected identity, diagonal, perturbed or tabulated, got '" + c.kind + "'");
    }

    const auto& w = s.weight;
    if (w.kind == "paraboloid") {
        require_length(w.center, n, "weight.center");
    } else if (w.kind == "polynomial") {
        require(!w.terms.empty(), "weight.terms", "at least one term is required");
        for (std::size_t k = 0; k < w.terms.size(); ++k) {
            const auto& e = w.terms[k].exponents;
            const std::string path = index_path("weight.terms", k) + ".exponents";
            require(static_cast<int>(e.size()) == n, path, fmt::format("expected {} exponents", n));
            for (int p : e) require(p >= 0, path, "exponents must be non-negative");
        }
    } else {
        throw ConfigError("weight.kind", "expected paraboloid or polynomial, got '" + w.kind + "'");
    }

    check_expression(s.lower_order.q, "lower_order.q");
    check_expression(s.lower_order.q2, "lower_order.q2");
    require(static_cast<int>(s.lower_order.q1.size()) == n, "lower_order.q1",
            fmt::format("expected {} components, got {}", n, s.lower_order.q1.size()));
    for (int i = 0; i < n; ++i) check_expression(s.lower_order.q1[i], index_path("lower_order.q1", i));

    const auto& g = s.geometry;
    require(g.delta > 0, "geometry.delta", "must be positive");
    require(g.delta0 > 0, "geometry.delta0", "must be positive");
    require(g.delta0 < g.delta, "geometry.delta0", "must be smaller than geometry.delta");
    require(g.delta1 > 0 && g.delta1 < 0.5, "geometry.delta1", "must lie in (0, 0.5)");
    if (g.zeta) require_length(*g.zeta, n, "geometry.zeta");
    if (g.envelope_time_margin)
        require(*g.envelope_time_margin >= 0, "geometry.envelope_time_margin", "must be non-negative");
    if (g.envelope_space_margin)
        require(*g.envelope_space_margin >= 0, "geometry.envelope_space_margin", "must be non-negative");

    if (s.time.T) require(*s.time.T > 0, "time.T", "must be positive");
    require(s.time.T_factor > 1, "time.T_factor", "must exceed 1");

    const auto& cm = s.carleman;
    require(!cm.lambdas.empty(), "carleman.lambdas", "must not be empty");
    for (std::size_t i = 0; i < cm.lambdas.size(); ++i)
        require(cm.lambdas[i] > 0, index_path("carleman.lambdas", i), "must be positive");
    for (std::size_t i = 0; i < cm.identity_lambdas.size(); ++i)
        require(cm.identity_lambdas[i] > 0, index_path("carleman.identity_lambdas", i), "must be positive");
    require(cm.identity_points >= 1, "carleman.identity_points", "must be positive");
    require(cm.sweep_points >= 1, "carleman.sweep_points", "must be positive");
    require(cm.bump_width > 0, "carleman.bump_width", "must be positive");
    for (std::size_t i = 0; i < cm.families.size(); ++i) {
        const auto& f = cm.families[i];
        require(f == "polynomial" || f == "trigonometric" || f == "gaussian", index_path("carleman.families", i),
                "expected polynomial, trigonometric or gaussian, got '" + f + "'");
    }

    require(s.observability.modes >= 1, "observability.modes", "must be positive");
    for (std::size_t i = 0; i < s.observability.r_samples.size(); ++i)
        require(s.observability.r_samples[i] >= 0, index_path("observability.r_samples", i), "must be non-negative");

    const auto& e = s.energy;
    check_expression(e.w0, "energy.w0");
    check_expression(e.w1, "energy.w1");
    require(e.draws >= 0, "energy.draws", "must be non-negative");
    require(e.r >= 0, "energy.r", "must be non-negative");
    require_length(e.windows, 4, "energy.windows");
    require(e.windows[0] >= 0 && e.windows[3] <= 1, "energy.windows", "fractions must lie in [0, 1]");
    require(e.windows[0] <= e.windows[1] && e.windows[1] < e.windows[2] && e.windows[2] <= e.windows[3],
            "energy.windows", "expected S1 <= S2 < T2 <= T1");

    require(!s.output.empty(), "output", "must not be empty");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

int Scenario::dim() const { return domain.kind == "interval" ? 1 : 2; }

Scenario parse_scenario(const json& j) {
    Scenario s;
    Reader root(j, "");
    root.get("name", s.name);
    root.section("domain", [&](Reader& r) {
        r.get("kind", s.domain.kind);
        if (s.domain.kind != "interval") {
            s.domain.lo = {0.0, 0.0};
            s.domain.hi = {1.0, 1.0};
        }
        r.get("lo", s.domain.lo);
        r.get("hi", s.domain.hi);
        r.get("center", s.domain.center);
        r.get("radius", s.domain.radius);
    });
    const int n = s.dim();
    if (n == 2) {
        s.grid.cells = {64, 64};
        s.lower_order.q1 = {"0", "0"};
        s.weight.center = {-0.1, -0.1};
        s.energy.w0 = "sin(pi*x)*sin(pi*y)";
        s.energy.w1 = "sin(2*pi*x)*sin(pi*y)";
    }
    root.section("grid", [&](Reader& r) {
        r.get("cells", s.grid.cells);
        r.get("time_cells", s.grid.time_cells);
        r.get("s_cells", s.grid.s_cells);
    });
    root.section("coefficients", [&](Reader& r) {
        r.get("kind", s.coefficients.kind);
        r.get("values", s.coefficients.values);
        r.get("amplitude", s.coefficients.amplitude);
        r.get("cells", s.coefficients.cells);
        r.get("entries", s.coefficients.entries);
    });
    root.section("weight", [&](Reader& r) {
        r.get("kind", s.weight.kind);
        r.get("center", s.weight.center);
        if (const json* terms = r.raw("terms")) {
            const std::string path = r.at("terms");
            if (!terms->is_array()) throw ConfigError(path, "expected an array");
            s.weight.terms.clear();
            for (std::size_t k = 0; k < terms->size(); ++k) {
                WeightTermSpec t;
                Reader tr((*terms)[k], index_path(path, k));
                tr.get("coefficient", t.coefficient);
                tr.get("exponents", t.exponents);
                tr.finish();
                s.weight.terms.push_back(t);
            }
        }
    });
    root.section("lower_order", [&](Reader& r) {
        r.get("q", s.lower_order.q);
        r.get("q1", s.lower_order.q1);
        r.get("q2", s.lower_order.q2);
    });
    root.section("geometry", [&](Reader& r) {
        r.get("delta", s.geometry.delta);
        r.get("delta0", s.geometry.delta0);
        r.get("delta1", s.geometry.delta1);
        r.get("zeta", s.geometry.zeta);
        r.get("envelope_time_margin", s.geometry.envelope_time_margin);
        r.get("envelope_space_margin", s.geometry.envelope_space_margin);
    });
    root.section("time", [&](Reader& r) {
        r.get("T", s.time.T);
        r.get("T_factor", s.time.T_factor);
    });
    root.section("carleman", [&](Reader& r) {
        r.get("lambdas", s.carleman.lambdas);
        r.get("identity_lambdas", s.carleman.identity_lambdas);
        r.get("identity_points", s.carleman.identity_points);
        r.get("families", s.carleman.families);
        r.get("sweep_points", s.carleman.sweep_points);
        r.get("bump_width", s.carleman.bump_width);
    });
    root.section("observability", [&](Reader& r) {
        r.get("modes", s.observability.modes);
        r.get("refine", s.observability.refine);
        r.get("r_samples", s.observability.r_samples);
    });
    root.section("energy", [&](Reader& r) {
        r.get("w0", s.energy.w0);
        r.get("w1", s.energy.w1);
        r.get("draws", s.energy.draws);
        r.get("r", s.energy.r);
        r.get("windows", s.energy.windows);
    });
    root.get("output", s.output);
    root.get("seed", s.seed);
    root.finish();
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario", fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
    return parse_scenario(j);
}

json to_json(const Scenario& s) {
    json terms = json::array();
    for (const auto& t : s.weight.terms) terms.push_back({{"coefficient", t.coefficient}, {"exponents", t.exponents}});
    json domain = {{"kind", s.domain.kind}};
    if (s.domain.kind == "disk") {
        domain["center"] = s.domain.center;
        domain["radius"] = s.domain.radius;
    } else {
        domain["lo"] = s.domain.lo;
        domain["hi"] = s.domain.hi;
    }
    return {
        {"name", s.name},
        {"domain", domain},
        {"grid", {{"cells", s.grid.cells}, {"time_cells", s.grid.time_cells}, {"s_cells", s.grid.s_cells}}},
        {"coefficients",
         {{"kind", s.coefficients.kind},
          {"values", s.coefficients.values},
          {"amplitude", s.coefficients.amplitude},
          {"cells", s.coefficients.cells},
          {"entries", s.coefficients.entries}}},
        {"weight", {{"kind", s.weight.kind}, {"center", s.weight.center}, {"terms", terms}}},
        {"lower_order", {{"q", s.lower_order.q}, {"q1", s.lower_order.q1}, {"q2", s.lower_order.q2}}},
        {"geometry",
         {{"delta", s.geometry.delta},
          {"delta0", s.geometry.delta0},
          {"delta1", s.geometry.delta1},
          {"zeta", s.geometry.zeta ? json(*s.geometry.zeta) : json(nullptr)},
          {"envelope_time_margin", optional_json(s.geometry.envelope_time_margin)},
          {"envelope_space_margin", optional_json(s.geometry.envelope_space_margin)}}},
        {"time", {{"T", optional_json(s.time.T)}, {"T_factor", s.time.T_factor}}},
        {"carleman",
         {{"lambdas", s.carleman.lambdas},
          {"identity_lambdas", s.carleman.identity_lambdas},
          {"identity_points", s.carleman.identity_points},
          {"families", s.carleman.families},
          {"sweep_points", s.carleman.sweep_points},
          {"bump_width", s.carleman.bump_width}}},
        {"observability",
         {{"modes", s.observability.modes},
          {"refine", s.observability.refine},
          {"r_samples", s.observability.r_samples}}},
        {"energy",
         {{"w0", s.energy.w0},
          {"w1", s.energy.w1},
          {"draws", s.energy.draws},
          {"r", s.energy.r},
          {"windows", s.energy.windows}}},
        {"output", s.output},
        {"seed", s.seed},
    };
}

namespace {

Point to_point(const std::vector<double>& v) {
    Point p{0.0, 0.0};
    for (std::size_t i = 0; i < v.size() && i < 2; ++i) p[i] = v[i];
    return p;
}

Domain make_domain(const DomainSpec& d) {
    if (d.kind == "interval") return Domain::interval(d.lo[0], d.hi[0]);
    if (d.kind == "rectangle") return Domain::rectangle(to_point(d.lo), to_point(d.hi));
    return Domain::disk(to_point(d.center), d.radius);
}

CoefficientField make_coefficients(const Scenario& s, const Domain& domain) {
    const auto& c = s.coefficients;
    const int n = s.dim();
    if (c.kind == "diagonal") return CoefficientField::diagonal(c.values);
    if (c.kind == "perturbed") return CoefficientField::perturbed(n, c.amplitude);
    if (c.kind == "tabulated") {
        std::array<int, 2> cells{c.cells[0], n == 2 ? c.cells[1] : 0};
        return CoefficientField::tabulated(domain, cells, c.entries);
    }
    return CoefficientField::identity(n);
}

WeightField make_weight(const Scenario& s) {
    const int n = s.dim();
    if (s.weight.kind == "paraboloid") return WeightField::paraboloid(to_point(s.weight.center), n);
    std::vector<Polynomial::Term> terms;
    for (const auto& t : s.weight.terms) {
        Polynomial::Term term;
        term.coef = t.coefficient;
        for (int i = 0; i < n; ++i) term.powers[i] = t.exponents[i];
        terms.push_back(term);
    }
    return WeightField::polynomial(Polynomial(n, std::move(terms)));
}

}  // namespace

Setup materialize(const Scenario& s) {
    const int n = s.dim();
    Domain domain = make_domain(s.domain);
    GridPtr grid = make_grid(domain, {s.grid.cells[0], n == 2 ? s.grid.cells[1] : 0});
    std::vector<Expression> q1;
    for (const auto& e : s.lower_order.q1) q1.push_back(Expression::parse(e));
    LowerOrderTerms lot = LowerOrderTerms::from_expressions(n, Expression::parse(s.lower_order.q), q1,
                                                            Expression::parse(s.lower_order.q2));
    return Setup{grid, make_coefficients(s, domain), make_weight(s), std::move(lot)};
}

}  // namespace wobs

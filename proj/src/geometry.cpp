#include "wobs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace wobs {

BoundarySet compute_gamma0(const CoefficientField& h, const WeightField& d, const Grid& g) {
    const int n = g.dim();
    BoundarySet out;
    const auto& bnd = g.boundary();
    for (std::size_t b = 0; b < bnd.size(); ++b) {
        const Mat2 m = h.value(bnd[b].point);
        const WeightSample ds = d.sample(bnd[b].point);
        double conormal = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) conormal += m[j][k] * ds.grad[j] * bnd[b].normal[k];
        if (conormal > 0.0) out.push_back(b);
    }
    return out;
}

namespace {

double distance_to(const std::vector<Point>& anchors, const Point& p, int n) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : anchors) best = std::min(best, distance(a, p, n));
    return best;
}

}  // namespace

Neighborhood neighborhood(const BoundarySet& gamma, double radius, const Grid& g) {
    Neighborhood nb;
    nb.radius = radius;
    nb.mask = NodeMask(g.node_count());
    for (std::size_t b : gamma) nb.anchors.push_back(g.boundary().at(b).point);
    if (nb.anchors.empty()) return nb;
    for (std::size_t k : g.inside_nodes())
        if (distance_to(nb.anchors, g.coord(k), g.dim()) < radius - kGeomTol) nb.mask.set(k);
    return nb;
}

Neighborhood neighborhood_from_mask(NodeMask mask) {
    Neighborhood nb;
    nb.mask = std::move(mask);
    return nb;
}

Neighborhoods build_neighborhoods(const BoundarySet& gamma0, double delta, double delta0, const Grid& g) {
    if (!(delta0 > 0.0)) throw PreconditionError("build_neighborhoods: delta0 must be positive");
    if (!(delta0 < delta)) throw PreconditionError("build_neighborhoods: delta0 must be smaller than delta");
    if (gamma0.empty()) throw PreconditionError("build_neighborhoods: the observed boundary part is empty");
    return {neighborhood(gamma0, delta, g), neighborhood(gamma0, delta0, g)};
}

std::vector<Point> closed_complement(const Neighborhood& omega, const Grid& g) {
    const int n = g.dim();
    const bool metric = omega.radius > 0.0 && !omega.anchors.empty();
    std::vector<Point> pts;
    for (std::size_t k : g.inside_nodes())
        if (!omega.mask[k]) pts.push_back(g.coord(k));
    for (const auto& b : g.boundary()) {
        bool keep = false;
        if (metric) {
            keep = distance_to(omega.anchors, b.point, n) >= omega.radius - kGeomTol;
        } else {
            for (std::size_t m : g.neighbours(b.node))
                if (g.is_inside(m) && !omega.mask[m]) keep = true;
        }
        if (keep) pts.push_back(b.point);
    }
    if (metric && n == 1) {
        for (const auto& a : omega.anchors) {
            for (double sgn : {-1.0, 1.0}) {
                const Point p{a[0] + sgn * omega.radius, 0.0};
                if (!g.domain().contains(p)) continue;
                if (distance_to(omega.anchors, p, n) >= omega.radius - kGeomTol) pts.push_back(p);
            }
        }
    }
    return pts;
}

Times compute_times(const WeightField& d, const Neighborhood& omega, const Grid& g) {
    const auto comp = closed_complement(omega, g);
    if (comp.empty())
        throw PreconditionError("compute_times: the closed complement of the observation neighborhood is empty");
    Times t;
    t.R0 = std::numeric_limits<double>::infinity();
    for (const auto& cp : g.closure_points()) t.R0 = std::min(t.R0, std::sqrt(std::max(0.0, d.value(cp.point))));
    for (const auto& p : comp) t.R1 = std::max(t.R1, std::sqrt(std::max(0.0, d.value(p))));
    t.Tstar = 2.0 * t.R1;
    return t;
}

ObservationRegions build_observation_region(const WeightField& d, const CarlemanParameters& p,
                                            const Neighborhoods& nb, const GridPtr& g, int nt) {
    if (!(p.T > 0.0)) throw PreconditionError("build_observation_region: T must be positive");
    if (!(p.delta1 > 0.0 && p.delta1 < 0.5))
        throw PreconditionError("build_observation_region: delta1 must lie in (0, 1/2)");
    const TimeAxis t = TimeAxis::midpoint(p.T, nt);
    ObservationRegions r{SpaceTimeRegion(g, t), SpaceTimeRegion(g, t), SpaceTimeRegion(g, t)};
    r.D.label = "D";
    r.K.label = "K";
    r.K1.label = "K1";
    std::vector<double> dv(g->node_count(), 0.0);
    for (std::size_t k : g->inside_nodes()) dv[k] = d.value(g->coord(k));
    const double half = p.T / 2;
    for (std::size_t it = 0; it < t.size(); ++it) {
        const double tau = t.nodes[it] - half;
        const bool slab = std::abs(tau) < p.delta1 * p.T;
        for (std::size_t k : g->inside_nodes()) {
            const bool in_d = dv[k] - tau * tau > 0.0;
            const std::size_t f = r.D.index(it, k);
            if (in_d) r.D.set(f);
            const bool w = nb.omega.mask[k];
            const bool w0 = nb.omega0.mask[k];
            if (w) r.K1.set(f);
            if ((slab && w0) || (w && !w0 && in_d)) r.K.set(f);
        }
    }
    return r;
}

SpaceTimeRegion build_light_cone_region(const Point& x0, const ObservationRegions& r) {
    SpaceTimeRegion k2 = r.K1;
    k2.label = "K2";
    const Grid& g = r.K1.grid();
    const TimeAxis& t = r.K1.t_axis();
    for (std::size_t it = 0; it < t.size(); ++it) {
        for (std::size_t k : g.inside_nodes()) {
            const double dist = distance(g.coord(k), x0, g.dim());
            if (!(dist * dist > t.nodes[it] * t.nodes[it])) k2.set(k2.index(it, k), false);
        }
    }
    return k2;
}

ShiftedRegions build_shifted_regions(const WeightField& d, const CarlemanParameters& p, const CoefficientField& h,
                                     const Neighborhoods& nb, const GridPtr& g, int nt) {
    const int n = g->dim();
    std::optional<Point> x0 = d.center();
    if (!x0 && d.critical_point) x0 = d.critical_point;
    if (x0) {
        Point moved = *x0;
        for (int i = 0; i < n; ++i) moved[i] -= p.zeta[i];
        if (!g->domain().closure_contains(moved))
            throw PreconditionError(fmt::format("build_shifted_regions: shifted critical point {} leaves the closed domain",
                                                format_point(moved, n)));
    }
    const WeightField dz = d.shifted(p.zeta);
    for (const auto& cp : g->closure_points()) {
        Point y = cp.point;
        for (int i = 0; i < n; ++i) y[i] += p.zeta[i];
        if (!std::isfinite(dz.value(cp.point)))
            throw PreconditionError(
                fmt::format("build_shifted_regions: shifted weight not finite at {}", format_point(y, n)));
    }

    ShiftedRegions out{compute_gamma0(h, dz, *g), SpaceTimeRegion(g, TimeAxis::midpoint(p.T, nt)),
                       SpaceTimeRegion(g, TimeAxis::midpoint(p.T, nt)), 0.0, 0.0, 0.0};

    std::vector<Point> anchors;
    for (std::size_t b : out.gamma0_zeta) anchors.push_back(g->boundary()[b].point);
    const double delta0 = nb.omega0.radius;
    if (anchors.empty()) {
        out.delta2 = 0.5 * delta0;
    } else {
        double gap = std::numeric_limits<double>::infinity();
        std::size_t worst = 0;
        for (std::size_t k : g->inside_nodes()) {
            if (nb.omega0.mask[k]) continue;
            const double dist = distance_to(anchors, g->coord(k), n);
            if (dist < gap) {
                gap = dist;
                worst = k;
            }
        }
        const double resolvable = std::sqrt(static_cast<double>(n)) * g->max_spacing();
        if (!(gap > resolvable))
            throw VerificationError(
                fmt::format("build_shifted_regions: no delta2 < delta0 keeps the neighborhood of the shifted "
                            "boundary set inside omega0; node {} ({}) is at distance {}",
                            worst, format_point(g->coord(worst), n), gap),
                {worst});
        out.delta2 = 0.5 * std::min(gap, delta0);
    }

    for (const auto& q : closed_complement(nb.omega, *g))
        out.R1 = std::max({out.R1, std::sqrt(std::max(0.0, d.value(q))), std::sqrt(std::max(0.0, dz.value(q)))});
    out.Tstar2 = 2.0 * out.R1;

    ObservationRegions rz = build_observation_region(dz, p, nb, g, nt);
    out.Dzeta = std::move(rz.D);
    out.Kzeta = std::move(rz.K);
    out.Dzeta.label = "Dzeta";
    out.Kzeta.label = "Kzeta";
    return out;
}

SpaceTimeRegion observation_envelope(const SpaceTimeRegion& K, const SpaceTimeRegion& Kzeta, double time_margin,
                                     double space_margin) {
    if (!(time_margin > 0.0 && space_margin > 0.0))
        throw PreconditionError("observation_envelope: margins must be positive");
    const SpaceTimeRegion u = K.unite(Kzeta);
    const int rt = static_cast<int>(std::ceil(time_margin / u.t_axis().spacing() - 1e-9));
    int rx = 1;
    for (int ax = 0; ax < u.grid().dim(); ++ax)
        rx = std::max(rx, static_cast<int>(std::ceil(space_margin / u.grid().spacing(ax) - 1e-9)));
    SpaceTimeRegion w = u.dilate(std::max(rt, 1), rx);
    w.label = "W";
    return w;
}

namespace {

double max_weight_off(const WeightField& d, const Neighborhood& nb, const Grid& g) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : closed_complement(nb, g)) m = std::max(m, d.value(p));
    return m;
}

}  // namespace

ProofNeighborhoods build_proof_neighborhoods(const WeightField& d, const BoundarySet& gamma0, double delta,
                                             double delta0, double T, const Grid& g) {
    const double limit = T * T / 4;
    auto ok = [&](double r) { return max_weight_off(d, neighborhood(gamma0, r, g), g) < limit; };
    double r1 = delta0 + (delta - delta0) / 3;
    double r2 = delta0 + 2 * (delta - delta0) / 3;
    if (!ok(r1) && ok(delta)) {
        double lo = r1, hi = delta;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (ok(mid) ? hi : lo) = mid;
        }
        r1 = hi + (delta - hi) / 3;
        r2 = hi + 2 * (delta - hi) / 3;
        if (!ok(r1)) r1 = hi;
    }
    return {neighborhood(gamma0, r1, g), neighborhood(gamma0, r2, g)};
}

bool ChainReport::holds() const {
    return std::all_of(checks.begin(), checks.end(), [](const InclusionCheck& c) { return c.violations == 0; });
}

std::string ChainReport::describe() const {
    std::string s;
    for (const auto& c : checks) {
        if (c.violations == 0) continue;
        if (!s.empty()) s += "; ";
        s += fmt::format("{} ({} nodes)", c.name, c.violations);
    }
    return s.empty() ? "all inclusions hold" : s;
}

ChainReport check_inclusion_chain(const WeightField& d, const CarlemanParameters& p, const Neighborhood& omega1,
                                  const Grid& g, int nt, int ns) {
    const TimeAxis ta = TimeAxis::midpoint(p.T, nt);
    const TimeAxis sa = TimeAxis::midpoint(p.T, ns);
    const auto& nodes = g.inside_nodes();
    std::vector<double> dv(nodes.size());
    std::vector<std::uint8_t> off(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        dv[i] = d.value(g.coord(nodes[i]));
        off[i] = omega1.mask[nodes[i]] ? 0 : 1;
    }
    const double half = p.T / 2;
    const double w0 = p.eps_ladder[0] * p.T;
    const double w1 = p.eps_ladder[1] * p.T;
    const double b2 = (p.c + 2 * p.eps) * (p.c + 2 * p.eps);
    const double b1 = (p.c + p.eps) * (p.c + p.eps);
    const double b0 = p.c * p.c;

    std::array<std::size_t, 6> v{};
    for (double tn : ta.nodes) {
        const double tau = tn - half;
        for (double sn : sa.nodes) {
            const double sig = sn - half;
            const double q = tau * tau + sig * sig;
            const bool in0 = std::abs(tau) < w0 && std::abs(sig) < w0;
            const bool in1 = std::abs(tau) < w1 && std::abs(sig) < w1;
            for (std::size_t i = 0; i < dv.size(); ++i) {
                const double phi = dv[i] - p.alpha * q;
                const double br = dv[i] - q;
                const bool o = off[i];
                const bool a = in0 && o;
                const bool q2 = o && phi > b2;
                const bool q1 = o && phi > b1;
                const bool qc = o && phi > b0;
                const bool dp = o && br > 0.0;
                const bool e = in1 && o;
                v[0] += a && !q2;
                v[1] += q2 && !q1;
                v[2] += q1 && !qc;
                v[3] += qc && !dp;
                v[4] += dp && !e;
                v[5] += in0 && !(br > 0.0);
            }
        }
    }
    ChainReport r;
    r.nodes = ta.size() * sa.size() * nodes.size();
    r.checks = {{"Q0\\Q0' in Q(c+2eps)", v[0]},  {"Q(c+2eps) in Q(c+eps)", v[1]}, {"Q(c+eps) in Q(c)", v[2]},
                {"Q(c) in D'", v[3]},            {"D' in Q1\\Q1'", v[4]},        {"(T0,T0')^2 x Omega in D''", v[5]}};
    const auto& e = p.eps_ladder;
    const bool ladder = 0 < e[0] && e[0] < e[1] && e[1] < e[2] && e[2] < e[3] && e[3] < 0.5;
    r.checks.push_back({"eps ladder ordered in (0, 1/2)", ladder ? 0u : 1u});
    r.checks.push_back({"eps0 < delta1", e[0] < p.delta1 ? 0u : 1u});
    const bool window = p.alpha > 1 - 2 * p.c * p.c / (p.T * p.T) && p.alpha < 1 && p.alpha > 0;
    r.checks.push_back({"alpha window", window ? 0u : 1u});
    return r;
}

CarlemanParameters select_carleman_parameters(const WeightField& d, double T, const Neighborhood& omega1,
                                              const Grid& g, const SelectionOptions& opt, ChainReport* report) {
    if (!(T > 0.0)) throw PreconditionError("select_carleman_parameters: T must be positive");
    CarlemanParameters p;
    p.T = T;
    p.delta = opt.delta;
    p.delta0 = opt.delta0;
    p.delta1 = opt.delta1;
    p.omega1_radius = opt.omega1_radius > 0.0 ? opt.omega1_radius : omega1.radius;
    p.omega2_radius = opt.omega2_radius;

    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& cp : g.closure_points()) min_d = std::min(min_d, d.value(cp.point));
    if (!(min_d > 0.0))
        throw PreconditionError(fmt::format("select_carleman_parameters: min d = {} must be positive", min_d));
    p.R0 = std::sqrt(min_d);
    p.c = opt.c > 0.0 ? opt.c : (1.0 - opt.c_margin) * p.R0;
    if (!(p.c > 0.0 && p.c < p.R0))
        throw PreconditionError(
            fmt::format("select_carleman_parameters: level c = {} must lie in (0, R0) with R0 = {}", p.c, p.R0));

    const double alpha_lo = std::max(0.0, 1.0 - 2 * p.c * p.c / (T * T));
    p.alpha = 0.5 * (alpha_lo + 1.0);

    const auto comp = closed_complement(omega1, g);
    double max_d1 = -std::numeric_limits<double>::infinity();
    Point argmax{};
    for (const auto& q : comp) {
        const double v = d.value(q);
        if (v > max_d1) {
            max_d1 = v;
            argmax = q;
        }
    }
    if (comp.empty()) max_d1 = 0.0;
    if (!(max_d1 < T * T / 4))
        throw VerificationError(fmt::format("select_carleman_parameters: no feasible parameters: inclusion "
                                            "D' in Q1\\Q1' breaks since d = {} >= T^2/4 = {} at {} outside omega1",
                                            max_d1, T * T / 4, format_point(argmax, g.dim())));

    double e1 = 0.5 * (std::sqrt(std::max(0.0, max_d1)) / T + 0.5);
    p.eps = 0.5 * (std::sqrt(0.5 * (p.c * p.c + p.R0 * p.R0)) - p.c);
    auto inner = [&] {
        const double lvl = p.c + 2 * p.eps;
        return 0.5 * std::sqrt(std::max(0.0, p.R0 * p.R0 - lvl * lvl) / (2 * p.alpha * T * T));
    };
    double e0 = std::min({inner(), 0.5 * p.delta1, 0.5 * e1});
    auto fill = [&] {
        p.eps_ladder = {e0, e1, e1 + (0.5 - e1) / 3, e1 + 2 * (0.5 - e1) / 3};
    };
    fill();

    ChainReport rep;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        rep = check_inclusion_chain(d, p, omega1, g, opt.nt, opt.ns);
        if (rep.holds()) {
            if (report) *report = rep;
            return p;
        }
        const auto bad = [&](std::size_t i) { return rep.checks[i].violations > 0; };
        if (bad(0) || bad(5) || bad(7)) {
            e0 *= 0.5;
            if (bad(0)) p.eps *= 0.5;
        }
        if (bad(3) || bad(8)) p.alpha = 0.5 * (p.alpha + 1.0);
        if (bad(4)) e1 = 0.5 * (e1 + 0.5);
        fill();
    }
    if (report) *report = rep;
    throw VerificationError("select_carleman_parameters: no feasible parameters: " + rep.describe());
}

ProofSets build_proof_sets(const WeightField& d, const CarlemanParameters& p, double b, const Neighborhood& omega1,
                           const GridPtr& g, const TimeAxis& t, const TimeAxis& s) {
    ProofSets ps{SpaceTimeRegion(g, t, s), SpaceTimeRegion(g, t, s), SpaceTimeRegion(g, t, s)};
    ps.Qb.label = "Q(b)";
    ps.Dprime.label = "D'";
    ps.Dsecond.label = "D''";
    std::vector<double> dv(g->node_count(), 0.0);
    for (std::size_t k : g->inside_nodes()) dv[k] = d.value(g->coord(k));
    const double half = p.T / 2;
    for (std::size_t it = 0; it < t.size(); ++it) {
        const double tau = t.nodes[it] - half;
        for (std::size_t is = 0; is < s.size(); ++is) {
            const double sig = s.nodes[is] - half;
            const double q = tau * tau + sig * sig;
            for (std::size_t k : g->inside_nodes()) {
                const std::size_t f = ps.Qb.index(it, is, k);
                const bool off = !omega1.mask[k];
                const double br = dv[k] - q;
                if (off && dv[k] - p.alpha * q > b * b) ps.Qb.set(f);
                if (br > 0.0) {
                    ps.Dsecond.set(f);
                    if (off) ps.Dprime.set(f);
                }
            }
        }
    }
    return ps;
}

std::size_t window_containment_violations(const CarlemanParameters& p, const Neighborhoods& nb,
                                          const Neighborhood& omega2, const ObservationRegions& r) {
    const Grid& g = r.K.grid();
    const TimeAxis& t = r.K.t_axis();
    const double half = p.T / 2;
    std::size_t v = 0;
    for (std::size_t it = 0; it < t.size(); ++it) {
        const bool win = std::abs(t.nodes[it] - half) < p.eps_ladder[0] * p.T;
        for (std::size_t k : g.inside_nodes()) {
            const bool ring = nb.omega.mask[k] && !nb.omega0.mask[k];
            const bool lhs = (ring && r.D.at(it, k)) || (win && omega2.mask[k]);
            if (lhs && !r.K.at(it, k)) ++v;
        }
    }
    return v;
}

WaitingTimes waiting_time_comparison(const WeightField& d, const Neighborhood& omega, const Grid& g) {
    if (!d.center())
        throw PreconditionError("waiting_time_comparison: needs a paraboloid weight with a known center");
    const Point x0 = *d.center();
    const int n = g.dim();
    const auto comp = closed_complement(omega, g);
    if (comp.empty()) throw PreconditionError("waiting_time_comparison: the closed complement of omega is empty");
    WaitingTimes w;
    for (const auto& p : comp) w.T_new = std::max(w.T_new, 2 * distance(p, x0, n));
    for (const auto& cp : g.closure_points()) w.T_old = std::max(w.T_old, 2 * distance(cp.point, x0, n));
    return w;
}

}  // namespace wobs

#include "wobs/region.hpp"

#include <algorithm>

namespace wobs {

TimeAxis TimeAxis::midpoint(double T, int n) {
    if (!(T > 0.0) || n < 1) throw PreconditionError("time axis needs T > 0 and at least one cell");
    TimeAxis a;
    a.nodes.resize(n);
    a.weights.assign(n, T / n);
    for (int i = 0; i < n; ++i) a.nodes[i] = T * (i + 0.5) / n;
    return a;
}

TimeAxis TimeAxis::trapezoid(double T, int n) {
    if (!(T > 0.0) || n < 1) throw PreconditionError("time axis needs T > 0 and at least one step");
    TimeAxis a;
    a.nodes.resize(n + 1);
    a.weights.assign(n + 1, T / n);
    for (int i = 0; i <= n; ++i) a.nodes[i] = T * i / n;
    a.weights.front() *= 0.5;
    a.weights.back() *= 0.5;
    return a;
}

double TimeAxis::spacing() const {
    if (nodes.size() < 2) return weights.empty() ? 0.0 : weights[0];
    return nodes[1] - nodes[0];
}

SpaceTimeRegion::SpaceTimeRegion(GridPtr grid, TimeAxis t)
    : grid_(std::move(grid)), layout_(Layout::TX), t_(std::move(t)) {
    mask_.assign(t_.size() * grid_->node_count(), 0);
}

SpaceTimeRegion::SpaceTimeRegion(GridPtr grid, TimeAxis t, TimeAxis s)
    : grid_(std::move(grid)), layout_(Layout::TSX), t_(std::move(t)), s_(std::move(s)) {
    mask_.assign(t_.size() * s_.size() * grid_->node_count(), 0);
}

void SpaceTimeRegion::set(std::size_t flat, bool v) {
    if (v && !grid_->is_inside(flat % space_size())) return;
    mask_[flat] = v ? 1 : 0;
}

std::size_t SpaceTimeRegion::count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

double SpaceTimeRegion::measure() const {
    const double vol = grid_->cell_volume();
    const std::size_t ns = space_size();
    double total = 0.0;
    if (layout_ == Layout::TX) {
        for (std::size_t it = 0; it < t_.size(); ++it) {
            std::size_t c = 0;
            for (std::size_t k = 0; k < ns; ++k) c += mask_[it * ns + k];
            total += t_.weights[it] * vol * static_cast<double>(c);
        }
    } else {
        for (std::size_t it = 0; it < t_.size(); ++it) {
            for (std::size_t is = 0; is < s_.size(); ++is) {
                std::size_t c = 0;
                const std::size_t base = (it * s_.size() + is) * ns;
                for (std::size_t k = 0; k < ns; ++k) c += mask_[base + k];
                total += t_.weights[it] * s_.weights[is] * vol * static_cast<double>(c);
            }
        }
    }
    return total;
}

bool SpaceTimeRegion::compatible(const SpaceTimeRegion& o) const {
    if (layout_ != o.layout_) return false;
    if (grid_ != o.grid_) {
        const Grid& a = *grid_;
        const Grid& b = *o.grid_;
        if (a.dim() != b.dim() || a.node_count() != b.node_count()) return false;
        for (int ax = 0; ax < a.dim(); ++ax)
            if (a.spacing(ax) != b.spacing(ax) || a.domain().lo[ax] != b.domain().lo[ax]) return false;
        if (a.inside() != b.inside()) return false;
    }
    return t_ == o.t_ && s_ == o.s_;
}

void SpaceTimeRegion::require_compatible(const SpaceTimeRegion& o) const {
    if (!compatible(o)) throw PreconditionError("space-time regions live on different lattices");
}

SpaceTimeRegion SpaceTimeRegion::unite(const SpaceTimeRegion& o) const {
    require_compatible(o);
    SpaceTimeRegion r = *this;
    for (std::size_t i = 0; i < mask_.size(); ++i) r.mask_[i] = (mask_[i] | o.mask_[i]);
    return r;
}

SpaceTimeRegion SpaceTimeRegion::intersect(const SpaceTimeRegion& o) const {
    require_compatible(o);
    SpaceTimeRegion r = *this;
    for (std::size_t i = 0; i < mask_.size(); ++i) r.mask_[i] = (mask_[i] & o.mask_[i]);
    return r;
}

SpaceTimeRegion SpaceTimeRegion::minus(const SpaceTimeRegion& o) const {
    require_compatible(o);
    SpaceTimeRegion r = *this;
    for (std::size_t i = 0; i < mask_.size(); ++i) r.mask_[i] = (mask_[i] && !o.mask_[i]) ? 1 : 0;
    return r;
}

std::size_t SpaceTimeRegion::violations_of_subset(const SpaceTimeRegion& o) const {
    require_compatible(o);
    std::size_t v = 0;
    for (std::size_t i = 0; i < mask_.size(); ++i) v += (mask_[i] && !o.mask_[i]) ? 1 : 0;
    return v;
}

bool SpaceTimeRegion::subset_of(const SpaceTimeRegion& o) const { return violations_of_subset(o) == 0; }

bool SpaceTimeRegion::operator==(const SpaceTimeRegion& o) const { return compatible(o) && mask_ == o.mask_; }

SpaceTimeRegion SpaceTimeRegion::dilate(int time_radius, int space_radius) const {
    SpaceTimeRegion r = *this;
    std::fill(r.mask_.begin(), r.mask_.end(), 0);
    const Grid& g = *grid_;
    const int nx = g.nodes_along(0), ny = g.nodes_along(1);
    const int nt = static_cast<int>(t_.size());
    const int ns = layout_ == Layout::TSX ? static_cast<int>(s_.size()) : 1;
    const int ry = g.dim() == 2 ? space_radius : 0;
    for (int it = 0; it < nt; ++it) {
        for (int is = 0; is < ns; ++is) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    const std::size_t node = g.index(i, j);
                    const std::size_t src = layout_ == Layout::TX ? index(it, node) : index(it, is, node);
                    if (!mask_[src]) continue;
                    const int sr = layout_ == Layout::TSX ? time_radius : 0;
                    for (int dt = -time_radius; dt <= time_radius; ++dt) {
                        const int jt = it + dt;
                        if (jt < 0 || jt >= nt) continue;
                        for (int ds = -sr; ds <= sr; ++ds) {
                            const int js = is + ds;
                            if (js < 0 || js >= ns) continue;
                            for (int dy = -ry; dy <= ry; ++dy) {
                                const int jy = j + dy;
                                if (jy < 0 || jy >= ny) continue;
                                for (int dx = -space_radius; dx <= space_radius; ++dx) {
                                    const int jx = i + dx;
                                    if (jx < 0 || jx >= nx) continue;
                                    const std::size_t m = g.index(jx, jy);
                                    if (!g.is_inside(m)) continue;
                                    const std::size_t dst = layout_ == Layout::TX
                                                                ? index(static_cast<std::size_t>(jt), m)
                                                                : index(static_cast<std::size_t>(jt),
                                                                        static_cast<std::size_t>(js), m);
                                    r.mask_[dst] = 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return r;
}

SpaceTimeRegion cylinder(GridPtr grid, const TimeAxis& t, const NodeMask& space, double t_lo, double t_hi) {
    SpaceTimeRegion r(grid, t);
    for (std::size_t it = 0; it < t.size(); ++it) {
        const double tv = t.nodes[it];
        if (!(tv >= t_lo && tv <= t_hi)) continue;
        for (std::size_t k = 0; k < grid->node_count(); ++k)
            if (space[k]) r.set(r.index(it, k));
    }
    return r;
}

}  // namespace wobs

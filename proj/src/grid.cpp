#include "wobs/grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace wobs {

Domain Domain::interval(double a, double b) {
    if (!(b > a)) throw PreconditionError("interval domain needs a < b");
    Domain d;
    d.kind = Kind::Interval;
    d.lo = {a, 0.0};
    d.hi = {b, 0.0};
    return d;
}

Domain Domain::rectangle(const Point& lo, const Point& hi) {
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw PreconditionError("rectangle domain needs lo < hi");
    Domain d;
    d.kind = Kind::Rectangle;
    d.lo = lo;
    d.hi = hi;
    return d;
}

Domain Domain::disk(const Point& center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("disk domain needs a positive radius");
    Domain d;
    d.kind = Kind::Disk;
    d.center = center;
    d.radius = radius;
    d.lo = {center[0] - radius, center[1] - radius};
    d.hi = {center[0] + radius, center[1] + radius};
    return d;
}

bool Domain::contains(const Point& p) const {
    switch (kind) {
        case Kind::Interval:
            return p[0] > lo[0] + kGeomTol && p[0] < hi[0] - kGeomTol;
        case Kind::Rectangle:
            return p[0] > lo[0] + kGeomTol && p[0] < hi[0] - kGeomTol && p[1] > lo[1] + kGeomTol &&
                   p[1] < hi[1] - kGeomTol;
        case Kind::Disk:
            return distance(p, center, 2) < radius - kGeomTol;
    }
    return false;
}

bool Domain::closure_contains(const Point& p) const {
    switch (kind) {
        case Kind::Interval: return p[0] >= lo[0] - kGeomTol && p[0] <= hi[0] + kGeomTol;
        case Kind::Rectangle:
            return p[0] >= lo[0] - kGeomTol && p[0] <= hi[0] + kGeomTol && p[1] >= lo[1] - kGeomTol &&
                   p[1] <= hi[1] + kGeomTol;
        case Kind::Disk: return distance(p, center, 2) <= radius + kGeomTol;
    }
    return false;
}

double Domain::diameter() const {
    switch (kind) {
        case Kind::Interval: return hi[0] - lo[0];
        case Kind::Rectangle: return std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
        case Kind::Disk: return 2.0 * radius;
    }
    return 0.0;
}

std::string Domain::describe() const {
    switch (kind) {
        case Kind::Interval: return fmt::format("interval [{}, {}]", lo[0], hi[0]);
        case Kind::Rectangle:
            return fmt::format("rectangle [{}, {}] x [{}, {}]", lo[0], hi[0], lo[1], hi[1]);
        case Kind::Disk: return fmt::format("disk center ({}, {}) radius {}", center[0], center[1], radius);
    }
    return {};
}

std::size_t NodeMask::count() const {
    return static_cast<std::size_t>(std::count_if(on.begin(), on.end(), [](std::uint8_t b) { return b != 0; }));
}

bool NodeMask::subset_of(const NodeMask& other) const {
    if (other.size() != size()) throw PreconditionError("mask size mismatch");
    for (std::size_t i = 0; i < on.size(); ++i)
        if (on[i] && !other.on[i]) return false;
    return true;
}

NodeMask NodeMask::minus(const NodeMask& other) const {
    if (other.size() != size()) throw PreconditionError("mask size mismatch");
    NodeMask r(size());
    for (std::size_t i = 0; i < on.size(); ++i) r.on[i] = (on[i] && !other.on[i]) ? 1 : 0;
    return r;
}

NodeMask NodeMask::unite(const NodeMask& other) const {
    if (other.size() != size()) throw PreconditionError("mask size mismatch");
    NodeMask r(size());
    for (std::size_t i = 0; i < on.size(); ++i) r.on[i] = (on[i] || other.on[i]) ? 1 : 0;
    return r;
}

Grid::Grid(Domain domain, std::array<int, 2> cells) : domain_(domain), cells_(cells) {
    const int n = domain_.dim();
    if (n == 1) cells_[1] = 0;
    for (int a = 0; a < n; ++a) {
        if (cells_[a] < 2) throw PreconditionError("grid needs at least 2 cells per axis");
        spacing_[a] = (domain_.hi[a] - domain_.lo[a]) / cells_[a];
        if (!(spacing_[a] > 0.0)) throw PreconditionError("grid spacing must be positive");
    }

    inside_ = NodeMask(node_count());
    for (std::size_t k = 0; k < node_count(); ++k) {
        const auto ij = this->ijk(k);
        bool in = false;
        switch (domain_.kind) {
            case Domain::Kind::Interval: in = ij[0] > 0 && ij[0] < cells_[0]; break;
            case Domain::Kind::Rectangle:
                in = ij[0] > 0 && ij[0] < cells_[0] && ij[1] > 0 && ij[1] < cells_[1];
                break;
            case Domain::Kind::Disk: in = domain_.contains(coord(k)); break;
        }
        if (in) {
            inside_.set(k);
            inside_nodes_.push_back(k);
        }
    }

    switch (domain_.kind) {
        case Domain::Kind::Interval:
            boundary_.push_back({index(0), coord(index(0)), {-1.0, 0.0}});
            boundary_.push_back({index(cells_[0]), coord(index(cells_[0])), {1.0, 0.0}});
            break;
        case Domain::Kind::Rectangle:
            for (std::size_t k = 0; k < node_count(); ++k) {
                const auto ij = this->ijk(k);
                Vec2 nu{0.0, 0.0};
                if (ij[0] == 0) nu[0] -= 1.0;
                if (ij[0] == cells_[0]) nu[0] += 1.0;
                if (ij[1] == 0) nu[1] -= 1.0;
                if (ij[1] == cells_[1]) nu[1] += 1.0;
                const double len = norm(nu, 2);
                if (len == 0.0) continue;
                boundary_.push_back({k, coord(k), {nu[0] / len, nu[1] / len}});
            }
            break;
        case Domain::Kind::Disk:
            for (std::size_t k = 0; k < node_count(); ++k) {
                if (inside_[k]) continue;
                const auto nb = neighbours(k);
                if (std::none_of(nb.begin(), nb.end(), [&](std::size_t m) { return inside_[m]; })) continue;
                const Point p = coord(k);
                Vec2 nu{p[0] - domain_.center[0], p[1] - domain_.center[1]};
                const double len = norm(nu, 2);
                nu = {nu[0] / len, nu[1] / len};
                const Point on{domain_.center[0] + domain_.radius * nu[0],
                               domain_.center[1] + domain_.radius * nu[1]};
                boundary_.push_back({k, on, nu});
            }
            break;
    }
}

double Grid::min_spacing() const {
    return dim() == 1 ? spacing_[0] : std::min(spacing_[0], spacing_[1]);
}

double Grid::max_spacing() const {
    return dim() == 1 ? spacing_[0] : std::max(spacing_[0], spacing_[1]);
}

std::array<int, 2> Grid::ijk(std::size_t node) const {
    const int nx = nodes_along(0);
    return {static_cast<int>(node % nx), static_cast<int>(node / nx)};
}

Point Grid::coord(std::size_t node) const {
    const auto ij = ijk(node);
    Point p{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) {
        // Divide last so lattice points like 0.7 land on the nearest double.
        p[a] = domain_.lo[a] + (domain_.hi[a] - domain_.lo[a]) * ij[a] / cells_[a];
    }
    return p;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing_[a];
    return v;
}

std::vector<Grid::ClosurePoint> Grid::closure_points() const {
    std::vector<ClosurePoint> pts;
    pts.reserve(inside_nodes_.size() + boundary_.size());
    for (std::size_t k : inside_nodes_) pts.push_back({coord(k), k, false, 0});
    for (std::size_t b = 0; b < boundary_.size(); ++b) pts.push_back({boundary_[b].point, boundary_[b].node, true, b});
    return pts;
}

std::vector<std::size_t> Grid::neighbours(std::size_t node) const {
    std::vector<std::size_t> nb;
    const auto ij = ijk(node);
    for (int a = 0; a < dim(); ++a) {
        for (int step : {-1, 1}) {
            auto q = ij;
            q[a] += step;
            if (q[a] < 0 || q[a] > cells_[a]) continue;
            nb.push_back(index(q[0], q[1]));
        }
    }
    return nb;
}

std::string Grid::describe() const {
    if (dim() == 1) return fmt::format("{} with {} cells (h={})", domain_.describe(), cells_[0], spacing_[0]);
    return fmt::format("{} with {}x{} cells (h={}, {})", domain_.describe(), cells_[0], cells_[1], spacing_[0],
                       spacing_[1]);
}

}  // namespace wobs

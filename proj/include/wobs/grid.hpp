#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wobs/common.hpp"

namespace wobs {

/// Analytic description of Omega. Normals come from this description, not
/// from the staircase of the lattice mask.
struct Domain {
    enum class Kind { Interval, Rectangle, Disk };

    Kind kind = Kind::Interval;
    Point lo{};  ///< lower corner of the bounding box
    Point hi{};  ///< upper corner of the bounding box
    Point center{};
    double radius = 0.0;

    static Domain interval(double a, double b);
    static Domain rectangle(const Point& lo, const Point& hi);
    static Domain disk(const Point& center, double radius);

    int dim() const { return kind == Kind::Interval ? 1 : 2; }
    /// Open-set membership, shrunk by kGeomTol.
    bool contains(const Point& p) const;
    /// Closed-set membership, grown by kGeomTol.
    bool closure_contains(const Point& p) const;
    double diameter() const;
    std::string describe() const;
};

/// A point of Gamma represented on the lattice.
struct BoundaryNode {
    std::size_t node = 0;  ///< lattice index the point is attached to
    Point point{};         ///< location on Gamma
    Vec2 normal{};         ///< outward unit normal
};

/// One byte per lattice node; nonzero means "in the set".
struct NodeMask {
    std::vector<std::uint8_t> on;

    NodeMask() = default;
    explicit NodeMask(std::size_t n, bool value = false) : on(n, value ? 1 : 0) {}

    std::size_t size() const { return on.size(); }
    bool operator[](std::size_t i) const { return on[i] != 0; }
    void set(std::size_t i, bool v = true) { on[i] = v ? 1 : 0; }
    std::size_t count() const;
    bool subset_of(const NodeMask& other) const;
    NodeMask minus(const NodeMask& other) const;
    NodeMask unite(const NodeMask& other) const;
    bool operator==(const NodeMask&) const = default;
};

/// Rectangular lattice over the bounding box of Omega with an inside mask.
class Grid {
public:
    /// `cells` holds the number of cells per axis (only the first dim used).
    Grid(Domain domain, std::array<int, 2> cells);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int nodes_along(int axis) const { return axis < dim() ? cells_[axis] + 1 : 1; }
    int cells_along(int axis) const { return cells_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double min_spacing() const;
    double max_spacing() const;
    std::size_t node_count() const { return static_cast<std::size_t>(nodes_along(0)) * nodes_along(1); }
    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * nodes_along(0) + i; }
    std::array<int, 2> ijk(std::size_t node) const;
    Point coord(std::size_t node) const;

    /// Volume of one lattice cell; the midpoint-rule weight of an inside node.
    double cell_volume() const;

    const NodeMask& inside() const { return inside_; }
    bool is_inside(std::size_t node) const { return inside_[node]; }
    const std::vector<std::size_t>& inside_nodes() const { return inside_nodes_; }
    const std::vector<BoundaryNode>& boundary() const { return boundary_; }

    /// Points of the closed domain: every inside node plus every boundary point.
    struct ClosurePoint {
        Point point{};
        std::size_t node = 0;
        bool on_boundary = false;
        std::size_t boundary_id = 0;
    };
    std::vector<ClosurePoint> closure_points() const;

    /// Lattice neighbours (2 per axis) that exist.
    std::vector<std::size_t> neighbours(std::size_t node) const;

    std::string describe() const;

private:
    Domain domain_;
    std::array<int, 2> cells_{};
    std::array<double, 2> spacing_{};
    NodeMask inside_;
    std::vector<std::size_t> inside_nodes_;
    std::vector<BoundaryNode> boundary_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(Domain domain, std::array<int, 2> cells) {
    return std::make_shared<const Grid>(domain, cells);
}

}  // namespace wobs

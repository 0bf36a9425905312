#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wobs/grid.hpp"

namespace wobs {

/// Nodes and quadrature weights of one time axis.
struct TimeAxis {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// n cells on [0, T], one node at each cell midpoint.
    static TimeAxis midpoint(double T, int n);
    /// n steps on [0, T]: n + 1 nodes with trapezoid weights.
    static TimeAxis trapezoid(double T, int n);

    std::size_t size() const { return nodes.size(); }
    double spacing() const;
    bool operator==(const TimeAxis&) const = default;
};

/// Indicator set on a (t, x) or (t, s, x) lattice.
///
/// Spatial membership is restricted to inside nodes of the grid; the measure
/// is the sum of time weights times cell volume over true nodes.
class SpaceTimeRegion {
public:
    enum class Layout { TX, TSX };

    SpaceTimeRegion(GridPtr grid, TimeAxis t);
    SpaceTimeRegion(GridPtr grid, TimeAxis t, TimeAxis s);

    Layout layout() const { return layout_; }
    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const TimeAxis& t_axis() const { return t_; }
    const TimeAxis& s_axis() const { return s_; }
    std::size_t space_size() const { return grid_->node_count(); }
    std::size_t size() const { return mask_.size(); }

    std::size_t index(std::size_t it, std::size_t node) const { return it * space_size() + node; }
    std::size_t index(std::size_t it, std::size_t is, std::size_t node) const {
        return (it * s_.size() + is) * space_size() + node;
    }

    bool at(std::size_t flat) const { return mask_[flat] != 0; }
    bool at(std::size_t it, std::size_t node) const { return mask_[index(it, node)] != 0; }
    bool at(std::size_t it, std::size_t is, std::size_t node) const { return mask_[index(it, is, node)] != 0; }
    /// Setting a node outside Omega is ignored.
    void set(std::size_t flat, bool v = true);

    const std::vector<std::uint8_t>& mask() const { return mask_; }

    std::size_t count() const;
    double measure() const;
    bool empty() const { return count() == 0; }

    SpaceTimeRegion unite(const SpaceTimeRegion& o) const;
    SpaceTimeRegion intersect(const SpaceTimeRegion& o) const;
    SpaceTimeRegion minus(const SpaceTimeRegion& o) const;
    bool subset_of(const SpaceTimeRegion& o) const;
    /// Number of nodes in *this but not in o.
    std::size_t violations_of_subset(const SpaceTimeRegion& o) const;
    bool operator==(const SpaceTimeRegion& o) const;

    /// Box dilation by `time_radius` nodes along every time axis and
    /// `space_radius` nodes along every spatial axis, clipped to the lattice
    /// and to Omega. With radius 1 this is the discrete closure.
    SpaceTimeRegion dilate(int time_radius, int space_radius) const;

    /// Throws PreconditionError unless both regions live on the same lattice.
    void require_compatible(const SpaceTimeRegion& o) const;
    bool compatible(const SpaceTimeRegion& o) const;

    std::string label;

private:
    GridPtr grid_;
    Layout layout_;
    TimeAxis t_, s_;
    std::vector<std::uint8_t> mask_;
};

/// (t-axis) x (spatial mask) cylinder on a (t, x) lattice.
SpaceTimeRegion cylinder(GridPtr grid, const TimeAxis& t, const NodeMask& space, double t_lo, double t_hi);

}  // namespace wobs

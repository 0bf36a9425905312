#pragma once

#include <string>

#include "wobs/grid.hpp"
#include "wobs/region.hpp"

namespace wobs {

/// Binary graymap (P5), 255 for members. Rows are time slices; for a planar
/// grid each time slice contributes ny rows of nx pixels. A header comment
/// records the axis extents.
void write_pgm(const std::string& path, const SpaceTimeRegion& r);
void write_pgm(const std::string& path, const NodeMask& m, const Grid& g);

/// One line per member node: time coordinates then spatial coordinates.
void write_region_csv(const std::string& path, const SpaceTimeRegion& r);

}  // namespace wobs

#include "wobs/region_io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace wobs {

namespace {

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error(fmt::format("cannot open {} for writing", path));
    return out;
}

std::string space_extents(const Grid& g) {
    const auto& d = g.domain();
    if (g.dim() == 1) return fmt::format("x:[{},{}]:{}", d.lo[0], d.hi[0], g.nodes_along(0));
    return fmt::format("x:[{},{}]:{} y:[{},{}]:{}", d.lo[0], d.hi[0], g.nodes_along(0), d.lo[1], d.hi[1],
                       g.nodes_along(1));
}

std::string axis_extents(const char* name, const TimeAxis& a) {
    if (a.nodes.empty()) return {};
    return fmt::format("{}:[{},{}]:{} ", name, a.nodes.front(), a.nodes.back(), a.size());
}

}  // namespace

void write_pgm(const std::string& path, const SpaceTimeRegion& r) {
    const Grid& g = r.grid();
    const std::size_t width = static_cast<std::size_t>(g.nodes_along(0));
    const std::size_t slices = r.size() / g.node_count();
    const std::size_t height = slices * static_cast<std::size_t>(g.nodes_along(1));
    auto out = open_out(path, true);
    std::string extents = axis_extents("t", r.t_axis());
    if (r.layout() == SpaceTimeRegion::Layout::TSX) extents += axis_extents("s", r.s_axis());
    out << "P5\n# " << r.label << " " << extents << space_extents(g) << "\n" << width << " " << height << "\n255\n";
    std::string row(r.size(), '\0');
    for (std::size_t i = 0; i < r.size(); ++i) row[i] = r.at(i) ? static_cast<char>(255) : '\0';
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

void write_pgm(const std::string& path, const NodeMask& m, const Grid& g) {
    auto out = open_out(path, true);
    out << "P5\n# " << space_extents(g) << "\n" << g.nodes_along(0) << " " << g.nodes_along(1) << "\n255\n";
    std::string row(m.size(), '\0');
    for (std::size_t i = 0; i < m.size(); ++i) row[i] = m[i] ? static_cast<char>(255) : '\0';
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

void write_region_csv(const std::string& path, const SpaceTimeRegion& r) {
    const Grid& g = r.grid();
    const bool tsx = r.layout() == SpaceTimeRegion::Layout::TSX;
    auto out = open_out(path, false);
    out << "# schema: wobs-region-v1\n";
    out << (tsx ? "t,s," : "t,") << (g.dim() == 1 ? "x" : "x1,x2") << "\n";
    const std::size_t ns = tsx ? r.s_axis().size() : 1;
    for (std::size_t it = 0; it < r.t_axis().size(); ++it) {
        for (std::size_t is = 0; is < ns; ++is) {
            for (std::size_t k : g.inside_nodes()) {
                const bool on = tsx ? r.at(it, is, k) : r.at(it, k);
                if (!on) continue;
                const Point p = g.coord(k);
                std::string line = fmt::format("{:.17g}", r.t_axis().nodes[it]);
                if (tsx) line += fmt::format(",{:.17g}", r.s_axis().nodes[is]);
                line += fmt::format(",{:.17g}", p[0]);
                if (g.dim() == 2) line += fmt::format(",{:.17g}", p[1]);
                out << line << "\n";
            }
        }
    }
}

}  // namespace wobs

#ifndef CSHE_MESH_HPP
#define CSHE_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "cshe/geometry.hpp"

namespace cshe {

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<bool> boundary; // per node
    double h = 0.0;             // target size
    std::vector<double> grading; // exponent beta per re-entrant corner

    int node_count() const { return static_cast<int>(nodes.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
    double triangle_area(int t) const;
    double min_angle() const; // radians
};

// Conforming graded triangulation: ear clipping, Delaunay edge flips,
// longest-edge bisection down to diameter <= h, then a radial grading
// map toward each re-entrant corner with exponent 1/beta.
// beta_per_corner empty means beta = alpha_j at every re-entrant corner.
Mesh triangulate(const PolygonalDomain& domain, double h,
                 const std::vector<double>& beta_per_corner = {});

// Plain-text node/element lists: one record per line, index first.
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

} // namespace cshe

#endif

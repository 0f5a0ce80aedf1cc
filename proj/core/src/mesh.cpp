#include "cshe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cshe {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross2(b - a, c - a);
}

// Inside or on the boundary: a vertex sitting exactly on a candidate
// ear's edge blocks the ear (the diagonal would pass through it).
bool point_blocks_ear(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double scale = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const double tol = -1e-12 * scale * scale;
    const double d1 = cross2(b - a, p - a);
    const double d2 = cross2(c - b, p - b);
    const double d3 = cross2(a - c, p - c);
    return d1 >= tol && d2 >= tol && d3 >= tol;
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& poly) {
    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<std::array<int, 3>> tris;
    double clipped_area = 0.0;
    while (idx.size() > 3) {
        bool clipped = false;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const int ip = idx[(i + idx.size() - 1) % idx.size()];
            const int ic = idx[i];
            const int in = idx[(i + 1) % idx.size()];
            if (tri_area(poly[ip], poly[ic], poly[in]) <= 1e-14) continue; // reflex or flat
            bool empty = true;
            for (const int o : idx) {
                if (o == ip || o == ic || o == in) continue;
                if (point_blocks_ear(poly[o], poly[ip], poly[ic], poly[in])) {
                    empty = false;
                    break;
                }
            }
            if (!empty) continue;
            tris.push_back({ip, ic, in});
            clipped_area += tri_area(poly[ip], poly[ic], poly[in]);
            idx.erase(idx.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) throw std::runtime_error("triangulate: ear clipping failed (degenerate polygon)");
    }
    const double last = tri_area(poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if (last <= 1e-14)
        throw std::runtime_error("triangulate: ear clipping left a degenerate triangle");
    tris.push_back({idx[0], idx[1], idx[2]});
    double polygon_area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        polygon_area += 0.5 * cross2(poly[i], poly[(i + 1) % poly.size()]);
    }
    if (std::abs(clipped_area + last - polygon_area) > 1e-9 * polygon_area)
        throw std::runtime_error("triangulate: ear clipping area mismatch");
    return tris;
}

double min_angle_of(const Vec2& a, const Vec2& b, const Vec2& c) {
    auto ang = [](const Vec2& u, const Vec2& v) {
        return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
    };
    return std::min({ang(b - a, c - a), ang(a - b, c - b), ang(a - c, b - c)});
}

// Lawson flips on interior edges while they improve the min angle. Each
// pass rebuilds the edge map once and flips every improving edge whose
// triangles were not already touched this pass.
void improve_by_flips(const std::vector<Vec2>& nodes, std::vector<std::array<int, 3>>& tris) {
    for (int pass = 0; pass < 20; ++pass) {
        std::map<std::pair<int, int>, std::vector<int>> edge_tris;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            for (int e = 0; e < 3; ++e) {
                int u = tris[t][e], v = tris[t][(e + 1) % 3];
                if (u > v) std::swap(u, v);
                edge_tris[{u, v}].push_back(static_cast<int>(t));
            }
        }
        std::vector<bool> touched(tris.size(), false);
        int flips = 0;
        for (const auto& [edge, owners] : edge_tris) {
            if (owners.size() != 2) continue;
            if (touched[static_cast<std::size_t>(owners[0])] ||
                touched[static_cast<std::size_t>(owners[1])])
                continue;
            auto& t1 = tris[static_cast<std::size_t>(owners[0])];
            auto& t2 = tris[static_cast<std::size_t>(owners[1])];
            int a = -1, b = -1;
            for (const int v : t1)
                if (v != edge.first && v != edge.second) a = v;
            for (const int v : t2)
                if (v != edge.first && v != edge.second) b = v;
            if (a < 0 || b < 0 || a == b) continue;
            const double old_q = std::min(min_angle_of(nodes[t1[0]], nodes[t1[1]], nodes[t1[2]]),
                                          min_angle_of(nodes[t2[0]], nodes[t2[1]], nodes[t2[2]]));
            const std::array<int, 3> n1 = {a, edge.first, b};
            const std::array<int, 3> n2 = {a, b, edge.second};
            if (tri_area(nodes[n1[0]], nodes[n1[1]], nodes[n1[2]]) <= 1e-14) continue;
            if (tri_area(nodes[n2[0]], nodes[n2[1]], nodes[n2[2]]) <= 1e-14) continue;
            const double new_q = std::min(min_angle_of(nodes[n1[0]], nodes[n1[1]], nodes[n1[2]]),
                                          min_angle_of(nodes[n2[0]], nodes[n2[1]], nodes[n2[2]]));
            if (new_q > old_q + 1e-12) {
                t1 = n1;
                t2 = n2;
                touched[static_cast<std::size_t>(owners[0])] = true;
                touched[static_cast<std::size_t>(owners[1])] = true;
                ++flips;
            }
        }
        if (flips == 0) return;
    }
}

struct EdgeKey {
    int a, b;
    bool operator<(const EdgeKey& o) const { return a < o.a || (a == o.a && b < o.b); }
};
EdgeKey make_edge(int u, int v) { return u < v ? EdgeKey{u, v} : EdgeKey{v, u}; }

// Longest-edge (Rivara) bisection until every triangle has diameter <= h.
// Each round splits every triangle whose longest edge is marked; marks
// come from oversized triangles, hanging nodes left by a neighbour's
// split, and the conformity closure (a triangle with any marked edge
// marks its own longest edge).
void refine_to_size(std::vector<Vec2>& nodes, std::vector<std::array<int, 3>>& tris, double h) {
    auto longest_edge = [&](const std::array<int, 3>& t) {
        int best = 0;
        double len = -1.0;
        for (int e = 0; e < 3; ++e) {
            const double l = (nodes[t[e]] - nodes[t[(e + 1) % 3]]).norm();
            if (l > len + 1e-15) {
                len = l;
                best = e;
            }
        }
        return std::make_pair(best, len);
    };

    std::map<EdgeKey, int> midpoints; // persistent across rounds
    auto midpoint_of = [&](int u, int v) {
        const EdgeKey k = make_edge(u, v);
        auto it = midpoints.find(k);
        if (it != midpoints.end()) return it->second;
        nodes.push_back(0.5 * (nodes[u] + nodes[v]));
        const int id = static_cast<int>(nodes.size()) - 1;
        midpoints.emplace(k, id);
        return id;
    };

    for (int round = 0; round < 1000; ++round) {
        std::map<EdgeKey, bool> marked;
        for (const auto& t : tris) {
            const auto [e, len] = longest_edge(t);
            if (len > h) marked[make_edge(t[e], t[(e + 1) % 3])] = true;
            for (int i = 0; i < 3; ++i) {
                const EdgeKey k = make_edge(t[i], t[(i + 1) % 3]);
                if (midpoints.count(k)) marked[k] = true; // hanging node
            }
        }
        if (marked.empty()) return;

        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& t : tris) {
                bool touched = false;
                for (int i = 0; i < 3; ++i) {
                    if (marked.count(make_edge(t[i], t[(i + 1) % 3]))) touched = true;
                }
                if (!touched) continue;
                const auto [e, len] = longest_edge(t);
                (void)len;
                const EdgeKey k = make_edge(t[e], t[(e + 1) % 3]);
                if (!marked.count(k)) {
                    marked[k] = true;
                    grew = true;
                }
            }
        }

        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 2);
        for (const auto& t : tris) {
            const auto [e, len] = longest_edge(t);
            (void)len;
            const int u = t[e], v = t[(e + 1) % 3], w = t[(e + 2) % 3];
            if (marked.count(make_edge(u, v))) {
                const int m = midpoint_of(u, v);
                next.push_back({u, m, w});
                next.push_back({m, v, w});
            } else {
                next.push_back(t);
            }
        }
        tris = std::move(next);
    }
    throw std::runtime_error("triangulate: refinement did not terminate");
}

} // namespace

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    return tri_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

double Mesh::min_angle() const {
    double m = M_PI;
    for (const auto& t : triangles) {
        m = std::min(m, min_angle_of(nodes[t[0]], nodes[t[1]], nodes[t[2]]));
    }
    return m;
}

Mesh triangulate(const PolygonalDomain& domain, double h,
                 const std::vector<double>& beta_per_corner) {
    if (!(h > 0.0)) throw std::invalid_argument("triangulate: h must be positive");
    const auto& verts = domain.vertices();
    double min_edge = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < verts.size(); ++i) {
        min_edge = std::min(min_edge, (verts[(i + 1) % verts.size()] - verts[i]).norm());
    }
    if (h > 4.0 * min_edge)
        throw std::invalid_argument("triangulate: h too coarse to resolve the smallest edge");

    std::vector<double> beta = beta_per_corner;
    if (beta.empty()) {
        for (const auto& c : domain.corners()) beta.push_back(c.alpha);
    }
    if (beta.size() != static_cast<std::size_t>(domain.corner_count()))
        throw std::invalid_argument("triangulate: one grading exponent per re-entrant corner");
    for (const double b : beta) {
        if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("triangulate: beta must be in (0,1]");
    }

    Mesh mesh;
    mesh.nodes = verts;
    mesh.triangles = ear_clip(verts);
    mesh.h = h;
    mesh.grading = beta;
    improve_by_flips(mesh.nodes, mesh.triangles);
    refine_to_size(mesh.nodes, mesh.triangles, h);
    // bisection can halve the coarse angles; flips restore them
    improve_by_flips(mesh.nodes, mesh.triangles);

    // Radial grading toward each re-entrant corner. Inside radius R the
    // map r -> R (r/R)^{1/beta} keeps boundary nodes on the two adjacent
    // sides (they are rays through the vertex) and fixes r >= R; the
    // innermost node radii land near (h/2)^{1/beta} because bisection
    // stations nodes within half an element of the vertex.
    for (int j = 0; j < domain.corner_count(); ++j) {
        const Corner& c = domain.corner(j);
        const double R = c.r1;
        const double kappa = 1.0 / beta[static_cast<std::size_t>(j)];
        for (auto& node : mesh.nodes) {
            const Vec2 d = node - c.frame.origin;
            const double r = d.norm();
            if (r >= R || r == 0.0) continue;
            node = c.frame.origin + d * (std::pow(r / R, kappa - 1.0));
        }
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (mesh.triangle_area(static_cast<int>(t)) <= 0.0) {
            const auto& tri = mesh.triangles[t];
            std::ostringstream os;
            os << "triangulate: grading inverted a triangle at";
            for (int i = 0; i < 3; ++i)
                os << " (" << mesh.nodes[tri[i]].x() << "," << mesh.nodes[tri[i]].y() << ")";
            throw std::runtime_error(os.str());
        }
    }
    // the radial map stretches aspect ratios by up to the grading
    // exponent; reconnecting restores the angles without moving nodes
    improve_by_flips(mesh.nodes, mesh.triangles);

    // Boundary flags: nodes on any polygon edge.
    mesh.boundary.assign(mesh.nodes.size(), false);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (domain.boundary_distance(mesh.nodes[i]) < 1e-10) mesh.boundary[i] = true;
    }
    return mesh;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out.precision(17);
    out << "nodes " << mesh.node_count() << "\n";
    for (int i = 0; i < mesh.node_count(); ++i) {
        out << i << " " << mesh.nodes[static_cast<std::size_t>(i)].x() << " "
            << mesh.nodes[static_cast<std::size_t>(i)].y() << "\n";
    }
    out << "triangles " << mesh.triangle_count() << "\n";
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        out << t << " " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
    }
    int nb = 0;
    for (const bool b : mesh.boundary) nb += b ? 1 : 0;
    out << "boundary " << nb << "\n";
    int k = 0;
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.boundary[static_cast<std::size_t>(i)]) out << k++ << " " << i << "\n";
    }
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open mesh file for writing: " + path);
    write_mesh(mesh, out);
}

Mesh read_mesh(std::istream& in) {
    Mesh mesh;
    std::string tag;
    int count = 0;
    if (!(in >> tag >> count) || tag != "nodes") throw std::runtime_error("mesh read: bad node header");
    mesh.nodes.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        int idx;
        double x, y;
        in >> idx >> x >> y;
        mesh.nodes[static_cast<std::size_t>(idx)] = Vec2(x, y);
    }
    if (!(in >> tag >> count) || tag != "triangles")
        throw std::runtime_error("mesh read: bad triangle header");
    mesh.triangles.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        int idx, a, b, c;
        in >> idx >> a >> b >> c;
        mesh.triangles[static_cast<std::size_t>(idx)] = {a, b, c};
    }
    mesh.boundary.assign(mesh.nodes.size(), false);
    if (in >> tag >> count) {
        if (tag != "boundary") throw std::runtime_error("mesh read: bad boundary header");
        for (int i = 0; i < count; ++i) {
            int idx, node;
            in >> idx >> node;
            mesh.boundary[static_cast<std::size_t>(node)] = true;
        }
    }
    return mesh;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    return read_mesh(in);
}

} // namespace cshe

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpgfem {

/// Axis-aligned rectangle (x0,x1) x (y0,y1).
struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diameter() const { return std::hypot(width(), height()); }

    void validate() const {
        if (!(x0 < x1) || !(y0 < y1))
            throw std::invalid_argument("Rect: requires x0 < x1 and y0 < y1");
    }
};

struct Triangle {
    std::array<int, 3> v;    // vertex indices, counter-clockwise
    std::array<int, 3> edge; // edge[k] is the global edge between v[k] and v[(k+1)%3]
};

struct Edge {
    int a = -1, b = -1;            // endpoints, a < b
    std::array<int, 2> tri{-1, -1}; // adjacent triangles; tri[1] == -1 on the boundary
    bool boundary() const { return tri[1] < 0; }
};

/// Conforming triangulation of a rectangle. Immutable after construction.
struct Mesh {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<Triangle> triangles;
    std::vector<Edge> edges;
    double h = 0.0; // mesh width: maximal edge length
    Rect rect;
    int nx = 0, ny = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    double tri_area(int t) const {
        const auto& tr = triangles[t];
        const Eigen::Vector2d d1 = vertices[tr.v[1]] - vertices[tr.v[0]];
        const Eigen::Vector2d d2 = vertices[tr.v[2]] - vertices[tr.v[0]];
        return 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
    }
};

/// Structured triangulation of `rect`: nx*ny cells, each split along the
/// diagonal from its lower-left to its upper-right corner.
inline Mesh build_rect_mesh(const Rect& rect, int nx, int ny) {
    rect.validate();
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_rect_mesh: nx and ny must be >= 1");

    Mesh mesh;
    mesh.rect = rect;
    mesh.nx = nx;
    mesh.ny = ny;

    const double dx = rect.width() / nx;
    const double dy = rect.height() / ny;
    mesh.vertices.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.emplace_back(rect.x0 + i * dx, rect.y0 + j * dy);

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

    mesh.triangles.reserve(2 * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({{v00, v10, v11}, {-1, -1, -1}});
            mesh.triangles.push_back({{v00, v11, v01}, {-1, -1, -1}});
        }
    }

    // assign global edge ids; adjacency in triangle-visit order, so tri[0] < tri[1]
    std::map<std::pair<int, int>, int> edge_of;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        auto& tr = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tr.v[k], b = tr.v[(k + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                const int e = mesh.num_edges();
                mesh.edges.push_back({key.first, key.second, {t, -1}});
                edge_of.emplace(key, e);
                tr.edge[k] = e;
            } else {
                mesh.edges[it->second].tri[1] = t;
                tr.edge[k] = it->second;
            }
        }
    }

    mesh.h = 0.0;
    for (const auto& e : mesh.edges)
        mesh.h = std::max(mesh.h, (mesh.vertices[e.b] - mesh.vertices[e.a]).norm());
    return mesh;
}

/// Edge-wise data of the skeleton of a triangulation: per edge one fixed unit
/// normal n_e and, per (triangle, local edge), the sign s with s * n_e equal to
/// the outward normal of that triangle on the edge.
///
/// n_e is the outward normal of the first adjacent triangle (the one with the
/// lower index), so interior edges carry signs (+1, -1) and boundary edges +1.
struct Skeleton {
    std::vector<Eigen::Vector2d> normal;       // per edge
    std::vector<double> length;                // per edge
    std::vector<std::array<double, 3>> sign;   // per triangle, local edge k
};

inline Skeleton extract_skeleton(const Mesh& mesh) {
    Skeleton sk;
    sk.normal.resize(mesh.num_edges());
    sk.length.resize(mesh.num_edges());
    sk.sign.assign(mesh.num_triangles(), {0.0, 0.0, 0.0});

    // outward normal of triangle t on its local edge k (CCW vertex order)
    auto outward = [&](int t, int k) {
        const auto& tr = mesh.triangles[t];
        const Eigen::Vector2d a = mesh.vertices[tr.v[k]];
        const Eigen::Vector2d b = mesh.vertices[tr.v[(k + 1) % 3]];
        const Eigen::Vector2d tang = (b - a).normalized();
        return Eigen::Vector2d(tang.y(), -tang.x());
    };

    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& ed = mesh.edges[e];
        sk.length[e] = (mesh.vertices[ed.b] - mesh.vertices[ed.a]).norm();
        const int t0 = ed.tri[0];
        int k0 = -1;
        for (int k = 0; k < 3; ++k)
            if (mesh.triangles[t0].edge[k] == e) k0 = k;
        sk.normal[e] = outward(t0, k0);
        sk.sign[t0][k0] = 1.0;
        if (!ed.boundary()) {
            const int t1 = ed.tri[1];
            for (int k = 0; k < 3; ++k)
                if (mesh.triangles[t1].edge[k] == e) sk.sign[t1][k] = -1.0;
        }
    }
    return sk;
}

enum class EntityTag : std::uint8_t { Interior, Gamma, Gamma1, Gamma2 };

/// Boundary classification of the two-subdomain decomposition. Edge and vertex
/// tags for both meshes plus the matching of interface entities (the meshes
/// are required to be compatible along Gamma).
struct BoundaryTags {
    std::vector<EntityTag> edge1, vertex1; // mesh1 entities
    std::vector<EntityTag> edge2, vertex2; // mesh2 entities
    std::vector<std::pair<int, int>> gamma_edges;    // (mesh1 edge, mesh2 edge)
    std::vector<std::pair<int, int>> gamma_vertices; // (mesh1 vertex, mesh2 vertex)
};

namespace detail {

// the segment shared by two rectangles; throws unless exactly one full side coincides
struct SharedSegment {
    Eigen::Vector2d a, b;
    bool contains(const Eigen::Vector2d& p, double tol) const {
        const Eigen::Vector2d d = b - a;
        const double len2 = d.squaredNorm();
        const double t = (p - a).dot(d) / len2;
        if (t < -tol || t > 1.0 + tol) return false;
        const Eigen::Vector2d proj = a + t * d;
        return (p - proj).norm() <= tol;
    }
};

inline SharedSegment shared_interface(const Rect& r1, const Rect& r2, double tol) {
    auto close = [tol](double u, double v) { return std::abs(u - v) <= tol; };
    const bool same_y = close(r1.y0, r2.y0) && close(r1.y1, r2.y1);
    const bool same_x = close(r1.x0, r2.x0) && close(r1.x1, r2.x1);
    if (same_y && close(r1.x1, r2.x0))
        return {{r1.x1, r1.y0}, {r1.x1, r1.y1}};
    if (same_y && close(r1.x0, r2.x1))
        return {{r1.x0, r1.y0}, {r1.x0, r1.y1}};
    if (same_x && close(r1.y1, r2.y0))
        return {{r1.x0, r1.y1}, {r1.x1, r1.y1}};
    if (same_x && close(r1.y0, r2.y1))
        return {{r1.x0, r1.y0}, {r1.x1, r1.y0}};
    throw std::invalid_argument("classify_boundary: subdomains must share exactly one full side");
}

} // namespace detail

/// Tag the boundary entities of both meshes: edges on the shared segment become
/// Gamma, the remaining boundary edges Gamma1 (mesh1) or Gamma2 (mesh2).
/// Vertex tags are induced; a vertex in the closure of both Gamma and the outer
/// boundary is tagged as Dirichlet boundary (Gamma1/Gamma2), not Gamma.
inline BoundaryTags classify_boundary(const Mesh& mesh1, const Mesh& mesh2,
                                      const Rect& r1, const Rect& r2) {
    const double diam = std::max(r1.diameter(), r2.diameter());
    const double tol = 1e-12 * diam;
    const auto seg = detail::shared_interface(r1, r2, tol);

    BoundaryTags tags;
    auto classify_mesh = [&](const Mesh& mesh, EntityTag dirichlet,
                             std::vector<EntityTag>& etags, std::vector<EntityTag>& vtags) {
        etags.assign(mesh.num_edges(), EntityTag::Interior);
        vtags.assign(mesh.num_vertices(), EntityTag::Interior);
        for (int e = 0; e < mesh.num_edges(); ++e) {
            const auto& ed = mesh.edges[e];
            if (!ed.boundary()) continue;
            const bool on_gamma = seg.contains(mesh.vertices[ed.a], tol) &&
                                  seg.contains(mesh.vertices[ed.b], tol);
            etags[e] = on_gamma ? EntityTag::Gamma : dirichlet;
        }
        // vertices: Gamma first, then Dirichlet wins at shared corners
        for (int e = 0; e < mesh.num_edges(); ++e) {
            if (etags[e] != EntityTag::Gamma) continue;
            vtags[mesh.edges[e].a] = EntityTag::Gamma;
            vtags[mesh.edges[e].b] = EntityTag::Gamma;
        }
        for (int e = 0; e < mesh.num_edges(); ++e) {
            if (etags[e] != dirichlet) continue;
            vtags[mesh.edges[e].a] = dirichlet;
            vtags[mesh.edges[e].b] = dirichlet;
        }
    };
    classify_mesh(mesh1, EntityTag::Gamma1, tags.edge1, tags.vertex1);
    classify_mesh(mesh2, EntityTag::Gamma2, tags.edge2, tags.vertex2);

    // pair interface entities by coordinates
    std::vector<int> g2_edges;
    for (int e = 0; e < mesh2.num_edges(); ++e)
        if (tags.edge2[e] == EntityTag::Gamma) g2_edges.push_back(e);
    for (int e = 0; e < mesh1.num_edges(); ++e) {
        if (tags.edge1[e] != EntityTag::Gamma) continue;
        const Eigen::Vector2d mid1 =
            0.5 * (mesh1.vertices[mesh1.edges[e].a] + mesh1.vertices[mesh1.edges[e].b]);
        int match = -1;
        for (int e2 : g2_edges) {
            const Eigen::Vector2d mid2 =
                0.5 * (mesh2.vertices[mesh2.edges[e2].a] + mesh2.vertices[mesh2.edges[e2].b]);
            if ((mid1 - mid2).norm() <= tol) { match = e2; break; }
        }
        if (match < 0)
            throw std::invalid_argument(
                "classify_boundary: meshes are not compatible along the interface");
        tags.gamma_edges.emplace_back(e, match);
    }
    if (tags.gamma_edges.size() != g2_edges.size())
        throw std::invalid_argument(
            "classify_boundary: meshes are not compatible along the interface");

    std::vector<int> g1_verts, g2_verts;
    for (int v = 0; v < mesh1.num_vertices(); ++v)
        if (tags.vertex1[v] == EntityTag::Gamma) g1_verts.push_back(v);
    for (int v = 0; v < mesh2.num_vertices(); ++v)
        if (tags.vertex2[v] == EntityTag::Gamma) g2_verts.push_back(v);
    if (g1_verts.size() != g2_verts.size())
        throw std::invalid_argument(
            "classify_boundary: interface vertex sets of the two meshes differ");
    for (int v1 : g1_verts) {
        int match = -1;
        for (int v2 : g2_verts)
            if ((mesh1.vertices[v1] - mesh2.vertices[v2]).norm() <= tol) { match = v2; break; }
        if (match < 0)
            throw std::invalid_argument(
                "classify_boundary: interface vertex mismatch beyond tolerance");
        tags.gamma_vertices.emplace_back(v1, match);
    }
    return tags;
}

} // namespace dpgfem

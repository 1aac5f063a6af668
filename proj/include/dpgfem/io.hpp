#pragma once

#include "dpgfem/mesh.hpp"

#include <Eigen/Sparse>

#include <iomanip>
#include <ostream>
#include <vector>

namespace dpgfem {

inline const char* tag_name(EntityTag tag) {
    switch (tag) {
    case EntityTag::Gamma: return "Gamma";
    case EntityTag::Gamma1: return "Gamma1";
    case EntityTag::Gamma2: return "Gamma2";
    default: return "interior";
    }
}

/// Plain-text mesh listing for debugging: vertices, triangles, edges with
/// adjacency and, when given, boundary tags.
inline void dump_mesh(std::ostream& os, const Mesh& mesh,
                      const std::vector<EntityTag>* edge_tags = nullptr,
                      const std::vector<EntityTag>* vertex_tags = nullptr) {
    os << std::setprecision(17);
    os << "# mesh " << mesh.nx << "x" << mesh.ny << " h=" << mesh.h << "\n";
    os << "vertices " << mesh.num_vertices() << "\n";
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        os << v << " " << mesh.vertices[v].x() << " " << mesh.vertices[v].y();
        if (vertex_tags) os << " " << tag_name((*vertex_tags)[v]);
        os << "\n";
    }
    os << "triangles " << mesh.num_triangles() << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        os << t << " " << tr.v[0] << " " << tr.v[1] << " " << tr.v[2] << "\n";
    }
    os << "edges " << mesh.num_edges() << "\n";
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& ed = mesh.edges[e];
        os << e << " " << ed.a << " " << ed.b << " " << ed.tri[0] << " " << ed.tri[1];
        if (edge_tags) os << " " << tag_name((*edge_tags)[e]);
        os << "\n";
    }
}

/// Coordinate-format matrix dump: one "row col value" line per stored entry.
inline void dump_matrix(std::ostream& os, const Eigen::SparseMatrix<double>& A) {
    os << std::setprecision(17);
    os << "# " << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace dpgfem

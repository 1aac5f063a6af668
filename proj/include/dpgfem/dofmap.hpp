#pragma once

#include "dpgfem/mesh.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace dpgfem {

enum class CouplingMode { Weak, Strong };

/// Global numbering of the five solution components, component-major:
/// u1 (one per T1 triangle), sigma (two per T1 triangle), uhat (one per free
/// T1 vertex), sighat (one per skeleton edge), u2 (one per free T2 vertex).
///
/// Dirichlet entities (uhat on the closure of Gamma1, u2 on the closure of
/// Gamma2) are excluded from the numbering; their lifted boundary values are
/// kept in `uhat_bc` / `u2_bc`. In strong coupling mode the u2 entries at
/// interface vertices alias the uhat index of the geometrically identical
/// mesh1 vertex.
struct DofMap {
    CouplingMode coupling = CouplingMode::Weak;
    int n_u1 = 0, n_sigma = 0, n_uhat = 0, n_sighat = 0, n_u2 = 0; // free counts
    int off_u1 = 0, off_sigma = 0, off_uhat = 0, off_sighat = 0, off_u2 = 0;
    int total = 0;

    std::vector<int> uhat_index;  // per mesh1 vertex; -1 if Dirichlet
    std::vector<double> uhat_bc;  // per mesh1 vertex; 0 where free
    std::vector<int> u2_index;    // per mesh2 vertex; -1 if Dirichlet
    std::vector<double> u2_bc;

    int u1_dof(int tri) const { return off_u1 + tri; }
    int sigma_dof(int tri, int comp) const { return off_sigma + 2 * tri + comp; }
    int sighat_dof(int edge) const { return off_sighat + edge; }
};

/// Deterministic numbering over the tagged meshes. `boundary_value` supplies
/// the Dirichlet datum for the lifting; pass nullptr for homogeneous data.
/// The skeleton parameter pins the edge numbering the sighat dofs refer to.
inline DofMap build_dof_map(const Mesh& mesh1, const Skeleton& /*skeleton*/,
                            const BoundaryTags& tags, const Mesh& mesh2,
                            CouplingMode mode,
                            const std::function<double(const Eigen::Vector2d&)>& boundary_value) {
    DofMap dm;
    dm.coupling = mode;
    dm.n_u1 = mesh1.num_triangles();
    dm.n_sigma = 2 * mesh1.num_triangles();
    dm.off_u1 = 0;
    dm.off_sigma = dm.off_u1 + dm.n_u1;
    dm.off_uhat = dm.off_sigma + dm.n_sigma;

    auto bc_value = [&](const Eigen::Vector2d& p) {
        return boundary_value ? boundary_value(p) : 0.0;
    };

    dm.uhat_index.assign(mesh1.num_vertices(), -1);
    dm.uhat_bc.assign(mesh1.num_vertices(), 0.0);
    int next = dm.off_uhat;
    for (int v = 0; v < mesh1.num_vertices(); ++v) {
        if (tags.vertex1[v] == EntityTag::Gamma1)
            dm.uhat_bc[v] = bc_value(mesh1.vertices[v]);
        else
            dm.uhat_index[v] = next++;
    }
    dm.n_uhat = next - dm.off_uhat;

    dm.off_sighat = next;
    dm.n_sighat = mesh1.num_edges();
    next += dm.n_sighat;

    dm.off_u2 = next;
    dm.u2_index.assign(mesh2.num_vertices(), -1);
    dm.u2_bc.assign(mesh2.num_vertices(), 0.0);

    if (mode == CouplingMode::Strong) {
        // interface vertices share the uhat dof of the matching mesh1 vertex
        for (const auto& [v1, v2] : tags.gamma_vertices) {
            if (dm.uhat_index[v1] < 0)
                throw std::invalid_argument(
                    "build_dof_map: strong coupling requires free uhat dofs on Gamma");
            dm.u2_index[v2] = dm.uhat_index[v1];
        }
    }
    for (int v = 0; v < mesh2.num_vertices(); ++v) {
        if (tags.vertex2[v] == EntityTag::Gamma2) {
            dm.u2_bc[v] = bc_value(mesh2.vertices[v]);
        } else if (dm.u2_index[v] < 0) {
            if (mode == CouplingMode::Strong && tags.vertex2[v] == EntityTag::Gamma)
                throw std::invalid_argument(
                    "build_dof_map: unmatched interface vertex in strong mode");
            dm.u2_index[v] = next++;
        }
    }
    dm.n_u2 = next - dm.off_u2;
    dm.total = next;
    return dm;
}

} // namespace dpgfem

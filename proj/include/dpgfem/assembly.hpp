#pragma once

#include "dpgfem/dofmap.hpp"
#include "dpgfem/dpg_local.hpp"
#include "dpgfem/mesh.hpp"
#include "dpgfem/problem.hpp"
#include "dpgfem/quadrature.hpp"

#include <Eigen/Sparse>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgfem {

struct QuadOptions {
    int volume_degree = 6;
    int edge_points = 4;
};

/// One additive contribution to the global system, kept in triplet form so the
/// blocks can be assembled, inspected and summed independently.
struct SystemBlock {
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::VectorXd rhs;

    explicit SystemBlock(int n) : rhs(Eigen::VectorXd::Zero(n)) {}

    Eigen::SparseMatrix<double> matrix(int n) const {
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(entries.begin(), entries.end());
        return A;
    }
};

/// Assembled square system on the free dofs. Generally nonsymmetric; the DPG
/// sub-block (u1, sigma, uhat, sighat rows/columns) is symmetric positive
/// semidefinite.
struct SparseSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    const DofMap* dofs = nullptr;
    double kappa = 1.0;
};

namespace detail {

// scatter a dense local block; Dirichlet columns are lifted to the rhs,
// Dirichlet rows dropped
template <class Matrix, class Vector>
void scatter(SystemBlock& block, const Matrix& local, const Vector& local_rhs,
             const std::vector<int>& rows, const std::vector<int>& cols,
             const std::vector<double>& col_bc) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0) continue;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j] >= 0)
                block.entries.emplace_back(rows[i], cols[j], local(i, j));
            else
                block.rhs[rows[i]] -= local(i, j) * col_bc[j];
        }
        block.rhs[rows[i]] += local_rhs(i);
    }
}

} // namespace detail

/// kappa * sum_T B_T^T G_T^{-1} B_T scattered into the trial dofs of T1, plus
/// the corresponding load. Dirichlet uhat columns are lifted.
inline SystemBlock assemble_dpg_block(const Mesh& mesh1, const Skeleton& skeleton,
                                      const DofMap& dofs, const ProblemDef& p, double kappa,
                                      const QuadOptions& quad = {}) {
    SystemBlock block(dofs.total);
    const TriangleRule tri_rule = triangle_quadrature(quad.volume_degree);
    const EdgeRule edge_rule = edge_quadrature(quad.edge_points);

    for (int t = 0; t < mesh1.num_triangles(); ++t) {
        const auto& tr = mesh1.triangles[t];
        const ElementGeometry geom(mesh1, t);
        const Mat18 G = local_gram(geom, tri_rule);
        const Mat18x9 B = local_b_matrix(geom, skeleton.sign[t], p.coeff, tri_rule, edge_rule);
        const Vec18 f = local_load(geom, p.exact.f, tri_rule);
        CondensedLocal local;
        try {
            local = condense(G, B, f);
        } catch (const std::runtime_error& err) {
            throw std::runtime_error("assemble_dpg_block: element " + std::to_string(t) +
                                     ": " + err.what());
        }

        std::vector<int> ids(kTrialDofs);
        std::vector<double> bc(kTrialDofs, 0.0);
        ids[0] = dofs.u1_dof(t);
        ids[1] = dofs.sigma_dof(t, 0);
        ids[2] = dofs.sigma_dof(t, 1);
        for (int k = 0; k < 3; ++k) {
            ids[3 + k] = dofs.uhat_index[tr.v[k]];
            bc[3 + k] = dofs.uhat_bc[tr.v[k]];
            ids[6 + k] = dofs.sighat_dof(tr.edge[k]);
        }
        detail::scatter(block, (kappa * local.S).eval(), (kappa * local.load).eval(), ids,
                        ids, bc);
    }
    return block;
}

/// P1 element matrix of c2 on one triangle: rows are the test functions.
inline Eigen::Matrix3d local_c2_matrix(const ElementGeometry& geom,
                                       const CoefficientFields& coeff,
                                       const TriangleRule& rule) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    const auto p1 = eval_basis(BasisFamily::P1, rule.points);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double wq = rule.weights[q] * geom.det;
        const Eigen::Vector2d x = geom.map(rule.points[q]);
        const Eigen::Matrix2d alpha = coeff.alpha(x);
        const Eigen::Vector2d beta = coeff.beta(x);
        const double gamma = coeff.gamma(x);
        Eigen::Matrix<double, 2, 3> grad;
        for (int i = 0; i < 3; ++i)
            grad.col(i) = geom.jac_inv_T * Eigen::Vector2d(p1.grad_x(i, q), p1.grad_y(i, q));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                M(i, j) += wq * ((alpha * grad.col(j) - beta * p1.value(j, q))
                                     .dot(grad.col(i)) +
                                 gamma * p1.value(j, q) * p1.value(i, q));
    }
    return M;
}

/// Standard primal FEM block on T2: c2(u2, w2) plus the load (f, w2).
/// Dirichlet u2 columns are lifted.
inline SystemBlock assemble_c2_block(const Mesh& mesh2, const DofMap& dofs,
                                     const ProblemDef& p, const QuadOptions& quad = {}) {
    SystemBlock block(dofs.total);
    const TriangleRule rule = triangle_quadrature(quad.volume_degree);

    for (int t = 0; t < mesh2.num_triangles(); ++t) {
        const auto& tr = mesh2.triangles[t];
        const ElementGeometry geom(mesh2, t);
        const Eigen::Matrix3d M = local_c2_matrix(geom, p.coeff, rule);

        Eigen::Vector3d load = Eigen::Vector3d::Zero();
        const auto p1 = eval_basis(BasisFamily::P1, rule.points);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double wq = rule.weights[q] * geom.det;
            const double fx = p.exact.f(geom.map(rule.points[q]));
            for (int i = 0; i < 3; ++i) load(i) += wq * fx * p1.value(i, q);
        }

        std::vector<int> ids(3);
        std::vector<double> bc(3, 0.0);
        for (int k = 0; k < 3; ++k) {
            ids[k] = dofs.u2_index[tr.v[k]];
            bc[k] = dofs.u2_bc[tr.v[k]];
        }
        detail::scatter(block, M, load, ids, ids, bc);
    }
    return block;
}

/// Interface coupling block. Weak mode assembles
///   <sighat, w2> + <chihat, uhat - u2> + 1/2 <beta.n (uhat - u2), what + w2>
/// over Gamma; strong mode only <sighat, w2> on the identified trace dofs.
/// All interface flux dofs are oriented with n pointing from Omega1 to Omega2.
inline SystemBlock assemble_d_block(const Mesh& mesh1, const Skeleton& skeleton,
                                    const BoundaryTags& tags, const Mesh& mesh2,
                                    const DofMap& dofs, const ProblemDef& p,
                                    CouplingMode mode, const QuadOptions& quad = {}) {
    SystemBlock block(dofs.total);
    const EdgeRule rule = edge_quadrature(quad.edge_points);

    for (const auto& [e1, e2] : tags.gamma_edges) {
        const auto& ed1 = mesh1.edges[e1];
        const auto& ed2 = mesh2.edges[e2];
        const Eigen::Vector2d pa = mesh1.vertices[ed1.a];
        const Eigen::Vector2d pb = mesh1.vertices[ed1.b];
        const double len = (pb - pa).norm();
        const Eigen::Vector2d n = skeleton.normal[e1];

        // the skeleton normal on Gamma must be the outward normal of Omega1
        const int t0 = ed1.tri[0];
        const Eigen::Vector2d centroid =
            (mesh1.vertices[mesh1.triangles[t0].v[0]] + mesh1.vertices[mesh1.triangles[t0].v[1]] +
             mesh1.vertices[mesh1.triangles[t0].v[2]]) /
            3.0;
        if ((0.5 * (pa + pb) - centroid).dot(n) <= 0.0)
            throw std::runtime_error("assemble_d_block: interface normal is not n_Omega1");

        // orient mesh2's endpoints to mesh1's (pa, pb) parameterization
        const double tol = 1e-12 * std::max(mesh1.rect.diameter(), mesh2.rect.diameter());
        int m2a = ed2.a, m2b = ed2.b;
        if ((mesh2.vertices[m2a] - pa).norm() > tol) std::swap(m2a, m2b);
        if ((mesh2.vertices[m2a] - pa).norm() > tol || (mesh2.vertices[m2b] - pb).norm() > tol)
            throw std::runtime_error("assemble_d_block: interface edges do not coincide");

        const int sig_dof = dofs.sighat_dof(e1);
        const std::array<int, 2> uhat_ids{dofs.uhat_index[ed1.a], dofs.uhat_index[ed1.b]};
        const std::array<double, 2> uhat_bc{dofs.uhat_bc[ed1.a], dofs.uhat_bc[ed1.b]};
        const std::array<int, 2> u2_ids{dofs.u2_index[m2a], dofs.u2_index[m2b]};
        const std::array<double, 2> u2_bc{dofs.u2_bc[m2a], dofs.u2_bc[m2b]};

        // local ordering: [sighat, uhat_a, uhat_b, u2_a, u2_b]
        std::vector<int> ids{sig_dof, uhat_ids[0], uhat_ids[1], u2_ids[0], u2_ids[1]};
        std::vector<double> bc{0.0, uhat_bc[0], uhat_bc[1], u2_bc[0], u2_bc[1]};
        Eigen::Matrix<double, 5, 5> D = Eigen::Matrix<double, 5, 5>::Zero();

        for (std::size_t r = 0; r < rule.points.size(); ++r) {
            const double t = rule.points[r];
            const double wr = rule.weights[r] * len;
            const std::array<double, 2> hat{1.0 - t, t};
            // <sighat, w2>: rows u2, col sighat
            for (int i = 0; i < 2; ++i) D(3 + i, 0) += wr * hat[i];
            if (mode == CouplingMode::Strong) continue;
            // <chihat, uhat - u2>: row sighat
            for (int j = 0; j < 2; ++j) {
                D(0, 1 + j) += wr * hat[j];
                D(0, 3 + j) -= wr * hat[j];
            }
            // 1/2 <beta.n (uhat - u2), what + w2>
            const double bn = p.coeff.beta(pa + t * (pb - pa)).dot(n);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    const double base = 0.5 * wr * bn * hat[i] * hat[j];
                    D(1 + i, 1 + j) += base; // what row, uhat col
                    D(1 + i, 3 + j) -= base;
                    D(3 + i, 1 + j) += base; // w2 row, uhat col
                    D(3 + i, 3 + j) -= base;
                }
            }
        }
        detail::scatter(block, D, Eigen::Matrix<double, 5, 1>::Zero().eval(), ids, ids, bc);
    }
    return block;
}

/// Full system of the coupled formulation: DPG block + FEM block + coupling,
/// with right-hand side kappa * L1(Theta w) + L2(w2) and the Dirichlet lifting
/// applied.
inline SparseSystem assemble(const Mesh& mesh1, const Skeleton& skeleton,
                             const BoundaryTags& tags, const Mesh& mesh2, const DofMap& dofs,
                             const ProblemDef& p, double kappa, CouplingMode mode,
                             const QuadOptions& quad = {}) {
    if (!(kappa > 0.0)) throw std::invalid_argument("assemble: kappa must be positive");
    SystemBlock dpg = assemble_dpg_block(mesh1, skeleton, dofs, p, kappa, quad);
    SystemBlock c2 = assemble_c2_block(mesh2, dofs, p, quad);
    SystemBlock d = assemble_d_block(mesh1, skeleton, tags, mesh2, dofs, p, mode, quad);

    SparseSystem sys;
    sys.dofs = &dofs;
    sys.kappa = kappa;
    std::vector<Eigen::Triplet<double>> all;
    all.reserve(dpg.entries.size() + c2.entries.size() + d.entries.size());
    all.insert(all.end(), dpg.entries.begin(), dpg.entries.end());
    all.insert(all.end(), c2.entries.begin(), c2.entries.end());
    all.insert(all.end(), d.entries.begin(), d.entries.end());
    sys.A.resize(dofs.total, dofs.total);
    sys.A.setFromTriplets(all.begin(), all.end());
    sys.b = dpg.rhs + c2.rhs + d.rhs;
    return sys;
}

} // namespace dpgfem

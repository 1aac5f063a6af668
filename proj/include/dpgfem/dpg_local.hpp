#pragma once

#include "dpgfem/basis.hpp"
#include "dpgfem/mesh.hpp"
#include "dpgfem/problem.hpp"
#include "dpgfem/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <stdexcept>

namespace dpgfem {

// Element-local trial layout (9 columns):
//   [0]     u1            (piecewise constant)
//   [1,2]   sigma_x/y     (piecewise constant vector)
//   [3..5]  uhat          at the three vertices
//   [6..8]  sighat        on the three edges (v0,v1), (v1,v2), (v2,v0),
//                         stored w.r.t. the skeleton's fixed edge normal;
//                         the orientation sign restores the outward-flux meaning.
// Test layout (18 rows): six scalar P2 functions, then the twelve components of
// the vector P2 space (all x-components first, then all y-components).
inline constexpr int kTrialDofs = 9;
inline constexpr int kTestDofs = 18;

using Mat18 = Eigen::Matrix<double, kTestDofs, kTestDofs>;
using Mat18x9 = Eigen::Matrix<double, kTestDofs, kTrialDofs>;
using Mat9 = Eigen::Matrix<double, kTrialDofs, kTrialDofs>;
using Vec18 = Eigen::Matrix<double, kTestDofs, 1>;
using Vec9 = Eigen::Matrix<double, kTrialDofs, 1>;

/// Affine reference-to-physical map of one triangle plus edge geometry.
struct ElementGeometry {
    std::array<Eigen::Vector2d, 3> v;
    Eigen::Matrix2d jac, jac_inv_T;
    double det = 0.0, area = 0.0;
    std::array<double, 3> edge_length;
    std::array<Eigen::Vector2d, 3> edge_normal; // outward unit normals

    ElementGeometry(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c)
        : v{a, b, c} {
        jac.col(0) = b - a;
        jac.col(1) = c - a;
        det = jac.determinant();
        area = 0.5 * det;
        const double scale = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
        if (!(area > 1e-14 * scale * scale))
            throw std::invalid_argument("ElementGeometry: degenerate triangle");
        jac_inv_T = jac.inverse().transpose();
        for (int k = 0; k < 3; ++k) {
            const Eigen::Vector2d d = v[(k + 1) % 3] - v[k];
            edge_length[k] = d.norm();
            edge_normal[k] = Eigen::Vector2d(d.y(), -d.x()) / edge_length[k];
        }
    }

    ElementGeometry(const Mesh& mesh, int t)
        : ElementGeometry(mesh.vertices[mesh.triangles[t].v[0]],
                          mesh.vertices[mesh.triangles[t].v[1]],
                          mesh.vertices[mesh.triangles[t].v[2]]) {}

    Eigen::Vector2d map(const Eigen::Vector2d& ref) const { return v[0] + jac * ref; }

    /// Reference coordinates of parameter t on local edge k, oriented v[k] -> v[k+1].
    static Eigen::Vector2d edge_ref(int k, double t) {
        switch (k) {
        case 0: return {t, 0.0};
        case 1: return {1.0 - t, t};
        default: return {0.0, 1.0 - t};
        }
    }
};

/// Test-space Gram matrix of the canonical inner product: H1(T) on the scalar
/// block, H(div,T) on the vector block. Block diagonal, symmetric positive
/// definite.
inline Mat18 local_gram(const ElementGeometry& geom, const TriangleRule& rule) {
    Mat18 G = Mat18::Zero();
    const auto p2 = eval_basis(BasisFamily::P2, rule.points);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double wq = rule.weights[q] * geom.det;
        Eigen::Matrix<double, 2, 6> grad;
        for (int i = 0; i < 6; ++i)
            grad.col(i) =
                geom.jac_inv_T * Eigen::Vector2d(p2.grad_x(i, q), p2.grad_y(i, q));
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                const double vij = p2.value(i, q) * p2.value(j, q);
                // scalar block: (v, v') + (grad v, grad v')
                G(i, j) += wq * (vij + grad.col(i).dot(grad.col(j)));
                // vector block: (tau, tau') + (div tau, div tau')
                for (int ci = 0; ci < 2; ++ci)
                    for (int cj = 0; cj < 2; ++cj)
                        G(6 + 6 * ci + i, 6 + 6 * cj + j) +=
                            wq * ((ci == cj ? vij : 0.0) + grad(ci, i) * grad(cj, j));
            }
        }
    }
    return G;
}

/// Element matrix of the ultra-weak form: rows are the 18 test functions,
/// columns the 9 trial dofs. Volume part
///   (u1, div tau + beta.alpha^{-T} tau + gamma v) + (sigma, grad v + alpha^{-T} tau),
/// boundary part -<uhat, tau.n> - <sighat, v> with n the element's outward
/// normal; sighat columns carry the orientation sign.
inline Mat18x9 local_b_matrix(const ElementGeometry& geom,
                              const std::array<double, 3>& sighat_sign,
                              const CoefficientFields& coeff, const TriangleRule& rule,
                              const EdgeRule& edge_rule) {
    Mat18x9 B = Mat18x9::Zero();
    const auto p2 = eval_basis(BasisFamily::P2, rule.points);

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double wq = rule.weights[q] * geom.det;
        const Eigen::Vector2d x = geom.map(rule.points[q]);
        const Eigen::Matrix2d ainvT = coeff.alpha_inv_T(x);
        const Eigen::Vector2d beta = coeff.beta(x);
        const double gamma = coeff.gamma(x);

        for (int i = 0; i < 6; ++i) {
            const double vi = p2.value(i, q);
            const Eigen::Vector2d gi =
                geom.jac_inv_T * Eigen::Vector2d(p2.grad_x(i, q), p2.grad_y(i, q));
            // scalar test function v_i
            B(i, 0) += wq * gamma * vi;
            B(i, 1) += wq * gi.x();
            B(i, 2) += wq * gi.y();
            // vector test functions (v_i, 0) and (0, v_i)
            for (int c = 0; c < 2; ++c) {
                const int row = 6 + 6 * c + i;
                const Eigen::Vector2d tau = vi * Eigen::Vector2d::Unit(c);
                const double div_tau = gi[c];
                B(row, 0) += wq * (div_tau + beta.dot(ainvT * tau));
                const Eigen::Vector2d at = ainvT * tau;
                B(row, 1) += wq * at.x();
                B(row, 2) += wq * at.y();
            }
        }
    }

    // boundary terms, edge-wise
    for (int k = 0; k < 3; ++k) {
        std::vector<Eigen::Vector2d> ref(edge_rule.points.size());
        for (std::size_t r = 0; r < edge_rule.points.size(); ++r)
            ref[r] = ElementGeometry::edge_ref(k, edge_rule.points[r]);
        const auto p2e = eval_basis(BasisFamily::P2, ref);
        const auto p1e = eval_basis(BasisFamily::P1, ref);
        const Eigen::Vector2d n = geom.edge_normal[k];
        for (std::size_t r = 0; r < edge_rule.points.size(); ++r) {
            const double wr = edge_rule.weights[r] * geom.edge_length[k];
            for (int i = 0; i < 6; ++i) {
                // -<sighat, v>: sighat trial on edge k is the sign w.r.t. n_T
                B(i, 6 + k) -= wr * sighat_sign[k] * p2e.value(i, r);
                // -<uhat, tau.n> for both vector components
                for (int c = 0; c < 2; ++c)
                    for (int j = 0; j < 3; ++j)
                        B(6 + 6 * c + i, 3 + j) -=
                            wr * p1e.value(j, r) * p2e.value(i, r) * n[c];
            }
        }
    }
    return B;
}

/// Load vector (f, v)_T over the scalar test block; zero on the vector block.
inline Vec18 local_load(const ElementGeometry& geom, const ScalarField& f,
                        const TriangleRule& rule) {
    Vec18 out = Vec18::Zero();
    const auto p2 = eval_basis(BasisFamily::P2, rule.points);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double wq = rule.weights[q] * geom.det;
        const double fx = f(geom.map(rule.points[q]));
        for (int i = 0; i < 6; ++i) out(i) += wq * fx * p2.value(i, q);
    }
    return out;
}

struct CondensedLocal {
    Mat9 S;    // B^T G^{-1} B
    Vec9 load; // B^T G^{-1} f
};

/// Condense the local test space: S = B^T G^{-1} B, load = B^T G^{-1} f via a
/// Cholesky factorization of the (SPD) Gram matrix. The kappa scaling is not
/// applied here; it enters once, globally.
inline CondensedLocal condense(const Mat18& G, const Mat18x9& B, const Vec18& f) {
    Eigen::LLT<Mat18> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("condense: local Gram matrix is not SPD");
    CondensedLocal out;
    out.S = B.transpose() * llt.solve(B);
    out.load = B.transpose() * llt.solve(f);
    return out;
}

/// Squared local energy residual r^T G^{-1} r with r = f - B x, evaluated as
/// |L^{-1} r|^2 so the result is nonnegative by construction.
inline double local_energy_residual(const Mat18& G, const Mat18x9& B, const Vec18& f,
                                    const Vec9& x) {
    Eigen::LLT<Mat18> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("local_energy_residual: Gram matrix is not SPD");
    const Vec18 r = f - B * x;
    const Vec18 y = llt.matrixL().solve(r);
    return y.squaredNorm();
}

} // namespace dpgfem

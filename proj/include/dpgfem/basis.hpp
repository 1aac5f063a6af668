#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>

namespace dpgfem {

enum class BasisFamily { P0, P1, P2, RT0 };

/// Values (and first derivatives) of a reference-element basis at a set of
/// reference points. Scalar families fill `value`/`grad_x`/`grad_y`; RT0 fills
/// `vec_x`/`vec_y`/`divergence`. All matrices are (function x point).
///
/// Conventions on the reference triangle with vertices (0,0), (1,0), (0,1):
///  - P1 functions are the barycentric coordinates [l0, l1, l2];
///  - P2 Lagrange nodes are ordered [v0, v1, v2, m01, m12, m20];
///  - RT0 functions are indexed by the edges (v0,v1), (v1,v2), (v2,v0) and
///    normalized so that the outward normal flux integrates to 1 on the own
///    edge and to 0 on the others.
struct BasisEval {
    BasisFamily family;
    int count = 0;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad_x, grad_y;
    Eigen::MatrixXd vec_x, vec_y, divergence;
};

inline BasisEval eval_basis(BasisFamily family, std::span<const Eigen::Vector2d> points) {
    const int np = static_cast<int>(points.size());
    BasisEval out;
    out.family = family;
    switch (family) {
    case BasisFamily::P0: {
        out.count = 1;
        out.value = Eigen::MatrixXd::Ones(1, np);
        out.grad_x = Eigen::MatrixXd::Zero(1, np);
        out.grad_y = Eigen::MatrixXd::Zero(1, np);
        break;
    }
    case BasisFamily::P1: {
        out.count = 3;
        out.value.resize(3, np);
        out.grad_x.resize(3, np);
        out.grad_y.resize(3, np);
        for (int q = 0; q < np; ++q) {
            const double x = points[q].x(), y = points[q].y();
            out.value(0, q) = 1.0 - x - y;
            out.value(1, q) = x;
            out.value(2, q) = y;
        }
        out.grad_x.setZero();
        out.grad_y.setZero();
        for (int q = 0; q < np; ++q) {
            out.grad_x(0, q) = -1.0;
            out.grad_y(0, q) = -1.0;
            out.grad_x(1, q) = 1.0;
            out.grad_y(2, q) = 1.0;
        }
        break;
    }
    case BasisFamily::P2: {
        out.count = 6;
        out.value.resize(6, np);
        out.grad_x.resize(6, np);
        out.grad_y.resize(6, np);
        for (int q = 0; q < np; ++q) {
            const double x = points[q].x(), y = points[q].y();
            const double l0 = 1.0 - x - y, l1 = x, l2 = y;
            // dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
            out.value(0, q) = l0 * (2.0 * l0 - 1.0);
            out.value(1, q) = l1 * (2.0 * l1 - 1.0);
            out.value(2, q) = l2 * (2.0 * l2 - 1.0);
            out.value(3, q) = 4.0 * l0 * l1;
            out.value(4, q) = 4.0 * l1 * l2;
            out.value(5, q) = 4.0 * l2 * l0;
            out.grad_x(0, q) = -(4.0 * l0 - 1.0);
            out.grad_y(0, q) = -(4.0 * l0 - 1.0);
            out.grad_x(1, q) = 4.0 * l1 - 1.0;
            out.grad_y(1, q) = 0.0;
            out.grad_x(2, q) = 0.0;
            out.grad_y(2, q) = 4.0 * l2 - 1.0;
            out.grad_x(3, q) = 4.0 * (l0 - l1);
            out.grad_y(3, q) = -4.0 * l1;
            out.grad_x(4, q) = 4.0 * l2;
            out.grad_y(4, q) = 4.0 * l1;
            out.grad_x(5, q) = -4.0 * l2;
            out.grad_y(5, q) = 4.0 * (l0 - l2);
        }
        break;
    }
    case BasisFamily::RT0: {
        out.count = 3;
        out.vec_x.resize(3, np);
        out.vec_y.resize(3, np);
        out.divergence = Eigen::MatrixXd::Constant(3, np, 2.0);
        // phi_e(x) = x - p_opp, with p_opp the vertex opposite edge e
        const Eigen::Vector2d opp[3] = {{0.0, 1.0}, {0.0, 0.0}, {1.0, 0.0}};
        for (int q = 0; q < np; ++q) {
            for (int e = 0; e < 3; ++e) {
                out.vec_x(e, q) = points[q].x() - opp[e].x();
                out.vec_y(e, q) = points[q].y() - opp[e].y();
            }
        }
        break;
    }
    default:
        throw std::invalid_argument("eval_basis: unknown family");
    }
    return out;
}

} // namespace dpgfem

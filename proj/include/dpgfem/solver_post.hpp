#pragma once

#include "dpgfem/assembly.hpp"
#include "dpgfem/dofmap.hpp"
#include "dpgfem/dpg_local.hpp"
#include "dpgfem/mesh.hpp"
#include "dpgfem/problem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dpgfem {

/// Discrete solution with per-component views. Dirichlet slots in `uhat` and
/// `u2` hold the lifted boundary values.
struct SolutionVector {
    Eigen::VectorXd x; // free coefficients
    std::vector<double> u1;              // per T1 triangle
    std::vector<Eigen::Vector2d> sigma;  // per T1 triangle
    std::vector<double> uhat;            // per T1 vertex
    std::vector<double> sighat;          // per T1 edge, w.r.t. the fixed edge normal
    std::vector<double> u2;              // per T2 vertex
};

struct SolveFailure : std::runtime_error {
    double residual = 0.0;
    SolveFailure(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
};

/// Direct sparse solve (LU) with a relative-residual contract of 1e-10; one
/// step of iterative refinement is applied before giving up.
inline SolutionVector solve(const SparseSystem& sys) {
    const DofMap& dofs = *sys.dofs;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve: sparse factorization failed (singular matrix?)");

    Eigen::VectorXd x = lu.solve(sys.b);
    const double bnorm = sys.b.norm();
    double residual = bnorm > 0.0 ? (sys.A * x - sys.b).norm() / bnorm : 0.0;
    if (residual > 1e-12 && bnorm > 0.0) {
        x += lu.solve((sys.b - sys.A * x).eval());
        residual = (sys.A * x - sys.b).norm() / bnorm;
    }
    if (residual > 1e-10)
        throw SolveFailure("solve: relative residual above tolerance", residual);

    SolutionVector sol;
    sol.x = std::move(x);
    sol.u1.resize(dofs.n_u1);
    sol.sigma.resize(dofs.n_u1);
    for (int t = 0; t < dofs.n_u1; ++t) {
        sol.u1[t] = sol.x[dofs.u1_dof(t)];
        sol.sigma[t] = {sol.x[dofs.sigma_dof(t, 0)], sol.x[dofs.sigma_dof(t, 1)]};
    }
    sol.uhat.resize(dofs.uhat_index.size());
    for (std::size_t v = 0; v < dofs.uhat_index.size(); ++v)
        sol.uhat[v] = dofs.uhat_index[v] >= 0 ? sol.x[dofs.uhat_index[v]] : dofs.uhat_bc[v];
    sol.sighat.resize(dofs.n_sighat);
    for (int e = 0; e < dofs.n_sighat; ++e) sol.sighat[e] = sol.x[dofs.sighat_dof(e)];
    sol.u2.resize(dofs.u2_index.size());
    for (std::size_t v = 0; v < dofs.u2_index.size(); ++v)
        sol.u2[v] = dofs.u2_index[v] >= 0 ? sol.x[dofs.u2_index[v]] : dofs.u2_bc[v];
    return sol;
}

/// Continuous piecewise-affine field on a triangulation, given by vertex values.
struct P1Field {
    const Mesh* mesh = nullptr;
    std::vector<double> vertex_values;

    double value(int tri, const Eigen::Vector2d& ref) const {
        const auto& tr = mesh->triangles[tri];
        const double l0 = 1.0 - ref.x() - ref.y();
        return l0 * vertex_values[tr.v[0]] + ref.x() * vertex_values[tr.v[1]] +
               ref.y() * vertex_values[tr.v[2]];
    }

    Eigen::Vector2d gradient(int tri) const {
        const auto& tr = mesh->triangles[tri];
        const ElementGeometry geom(*mesh, tri);
        // reference gradients of the barycentric coordinates
        const Eigen::Vector2d g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
        return geom.jac_inv_T * (vertex_values[tr.v[0]] * g0 + vertex_values[tr.v[1]] * g1 +
                                 vertex_values[tr.v[2]] * g2);
    }
};

/// Nodal interpolant of the skeleton trace: the P1 field with exactly the given
/// vertex values.
inline P1Field nodal_interpolant(const std::vector<double>& uhat, const Mesh& mesh1) {
    if (uhat.size() != static_cast<std::size_t>(mesh1.num_vertices()))
        throw std::invalid_argument("nodal_interpolant: one value per vertex required");
    return {&mesh1, uhat};
}

/// Lowest-order Raviart-Thomas field with prescribed constant normal traces
/// (w.r.t. the skeleton's fixed edge normals).
struct RT0Function {
    const Mesh* mesh = nullptr;
    const Skeleton* skeleton = nullptr;
    std::vector<double> edge_flux; // per edge, w.r.t. n_e

    Eigen::Vector2d value(int tri, const Eigen::Vector2d& x) const {
        const auto& tr = mesh->triangles[tri];
        const double area = mesh->tri_area(tri);
        Eigen::Vector2d out = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) {
            const Eigen::Vector2d opp = mesh->vertices[tr.v[(k + 2) % 3]];
            const double len = skeleton->length[tr.edge[k]];
            const double coeff = skeleton->sign[tri][k] * edge_flux[tr.edge[k]];
            out += coeff * len / (2.0 * area) * (x - opp);
        }
        return out;
    }

    double divergence(int tri) const {
        const auto& tr = mesh->triangles[tri];
        const double area = mesh->tri_area(tri);
        double div = 0.0;
        for (int k = 0; k < 3; ++k)
            div += skeleton->sign[tri][k] * edge_flux[tr.edge[k]] *
                   skeleton->length[tr.edge[k]] / area;
        return div;
    }
};

inline RT0Function rt_interpolant(const std::vector<double>& sighat, const Mesh& mesh1,
                                  const Skeleton& skeleton) {
    if (sighat.size() != static_cast<std::size_t>(mesh1.num_edges()))
        throw std::invalid_argument("rt_interpolant: one flux per edge required");
    return {&mesh1, &skeleton, sighat};
}

/// The six error quantities plus the interface jump norm.
struct ErrorReport {
    double err_u1 = 0.0;     // L2(Omega1)
    double err_sigma = 0.0;  // L2(Omega1)^2
    double err_u2 = 0.0;     // H1(Omega2)
    double err_uhat = 0.0;   // H1(Omega1) of u - nodal interpolant
    double err_sighat = 0.0; // H(div,Omega1) of sigma - RT0 interpolant
    double err_energy = 0.0; // residual norm of the DPG part
    double jump_L2 = 0.0;    // L2(Gamma) of uhat - u2
    int N = 0;
    double h = 0.0;
};

/// Location/value of the interface jump at one sample point; `s` is the
/// arc-length parameter along Gamma.
struct JumpSample {
    double s = 0.0;
    Eigen::Vector2d point;
    double value = 0.0;
};

/// Uniformly sampled jump uhat - u2 along Gamma, ordered by arc length.
inline std::vector<JumpSample> sample_interface_jump(const SolutionVector& sol,
                                                     const Mesh& mesh1, const Mesh& mesh2,
                                                     const BoundaryTags& tags,
                                                     int samples_per_edge = 16) {
    if (tags.gamma_edges.empty()) return {};
    // endpoints of the whole interface segment, lexicographic order
    Eigen::Vector2d start = mesh1.vertices[mesh1.edges[tags.gamma_edges[0].first].a];
    Eigen::Vector2d stop = start;
    auto lex_less = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    };
    for (const auto& [e1, e2] : tags.gamma_edges) {
        for (int vtx : {mesh1.edges[e1].a, mesh1.edges[e1].b}) {
            if (lex_less(mesh1.vertices[vtx], start)) start = mesh1.vertices[vtx];
            if (lex_less(stop, mesh1.vertices[vtx])) stop = mesh1.vertices[vtx];
        }
    }
    const Eigen::Vector2d dir = (stop - start).normalized();
    const double tol = 1e-12 * std::max(mesh1.rect.diameter(), mesh2.rect.diameter());

    std::vector<JumpSample> samples;
    for (const auto& [e1, e2] : tags.gamma_edges) {
        int a1 = mesh1.edges[e1].a, b1 = mesh1.edges[e1].b;
        if ((mesh1.vertices[b1] - start).dot(dir) < (mesh1.vertices[a1] - start).dot(dir))
            std::swap(a1, b1);
        int a2 = mesh2.edges[e2].a, b2 = mesh2.edges[e2].b;
        if ((mesh2.vertices[a2] - mesh1.vertices[a1]).norm() > tol) std::swap(a2, b2);
        const Eigen::Vector2d pa = mesh1.vertices[a1], pb = mesh1.vertices[b1];
        for (int i = 0; i < samples_per_edge; ++i) {
            const double t = (i + 0.5) / samples_per_edge;
            JumpSample s;
            s.point = pa + t * (pb - pa);
            s.s = (s.point - start).dot(dir);
            s.value = (1.0 - t) * sol.uhat[a1] + t * sol.uhat[b1] -
                      ((1.0 - t) * sol.u2[a2] + t * sol.u2[b2]);
            samples.push_back(s);
        }
    }
    std::sort(samples.begin(), samples.end(),
              [](const JumpSample& a, const JumpSample& b) { return a.s < b.s; });
    return samples;
}

/// All error quantities of one solve. The exact divergence of sigma is
/// evaluated through the identity div sigma = gamma u - f; error integrands use
/// a quadrature two degrees above the assembly default.
inline ErrorReport compute_errors(const SolutionVector& sol, const ProblemDef& p,
                                  const Mesh& mesh1, const Skeleton& skeleton,
                                  const BoundaryTags& tags, const Mesh& mesh2,
                                  const DofMap& dofs, const QuadOptions& quad = {},
                                  double kappa = 1.0) {
    ErrorReport rep;
    rep.N = dofs.total;
    rep.h = std::max(mesh1.h, mesh2.h);

    const TriangleRule err_rule = triangle_quadrature(std::min(10, quad.volume_degree + 2));
    const TriangleRule asm_rule = triangle_quadrature(quad.volume_degree);
    const EdgeRule edge_rule = edge_quadrature(quad.edge_points);
    const P1Field iu = nodal_interpolant(sol.uhat, mesh1);
    const RT0Function rt = rt_interpolant(sol.sighat, mesh1, skeleton);

    double e_u1 = 0.0, e_sig = 0.0, e_uhat = 0.0, e_sighat = 0.0, e_energy = 0.0;
    for (int t = 0; t < mesh1.num_triangles(); ++t) {
        const ElementGeometry geom(mesh1, t);
        const Eigen::Vector2d grad_iu = iu.gradient(t);
        const double div_rt = rt.divergence(t);
        for (std::size_t q = 0; q < err_rule.points.size(); ++q) {
            const double wq = err_rule.weights[q] * geom.det;
            const Eigen::Vector2d x = geom.map(err_rule.points[q]);
            const double du1 = p.exact.u(x) - sol.u1[t];
            e_u1 += wq * du1 * du1;
            const Eigen::Vector2d dsig = p.exact.sigma(x) - sol.sigma[t];
            e_sig += wq * dsig.squaredNorm();
            const double duh = p.exact.u(x) - iu.value(t, err_rule.points[q]);
            const Eigen::Vector2d dguh = p.exact.grad_u(x) - grad_iu;
            e_uhat += wq * (duh * duh + dguh.squaredNorm());
            const Eigen::Vector2d drt = p.exact.sigma(x) - rt.value(t, x);
            const double ddiv = p.exact.div_sigma(x) - div_rt;
            e_sighat += wq * (drt.squaredNorm() + ddiv * ddiv);
        }

        // local residual in the discrete dual norm
        const Mat18 G = local_gram(geom, asm_rule);
        const Mat18x9 B =
            local_b_matrix(geom, skeleton.sign[t], p.coeff, asm_rule, edge_rule);
        const Vec18 fT = local_load(geom, p.exact.f, asm_rule);
        Vec9 xT;
        const auto& tr = mesh1.triangles[t];
        xT << sol.u1[t], sol.sigma[t].x(), sol.sigma[t].y(), sol.uhat[tr.v[0]],
            sol.uhat[tr.v[1]], sol.uhat[tr.v[2]], sol.sighat[tr.edge[0]],
            sol.sighat[tr.edge[1]], sol.sighat[tr.edge[2]];
        e_energy += local_energy_residual(G, B, fT, xT);
    }
    rep.err_u1 = std::sqrt(e_u1);
    rep.err_sigma = std::sqrt(e_sig);
    rep.err_uhat = std::sqrt(e_uhat);
    rep.err_sighat = std::sqrt(e_sighat);
    rep.err_energy = kappa * std::sqrt(e_energy);

    double e_u2 = 0.0;
    const P1Field u2f{&mesh2, sol.u2};
    for (int t = 0; t < mesh2.num_triangles(); ++t) {
        const ElementGeometry geom(mesh2, t);
        const Eigen::Vector2d grad_u2 = u2f.gradient(t);
        for (std::size_t q = 0; q < err_rule.points.size(); ++q) {
            const double wq = err_rule.weights[q] * geom.det;
            const Eigen::Vector2d x = geom.map(err_rule.points[q]);
            const double du = p.exact.u(x) - u2f.value(t, err_rule.points[q]);
            const Eigen::Vector2d dg = p.exact.grad_u(x) - grad_u2;
            e_u2 += wq * (du * du + dg.squaredNorm());
        }
    }
    rep.err_u2 = std::sqrt(e_u2);

    double jump2 = 0.0;
    const double tol = 1e-12 * std::max(mesh1.rect.diameter(), mesh2.rect.diameter());
    for (const auto& [e1, e2] : tags.gamma_edges) {
        const auto& ed1 = mesh1.edges[e1];
        int a2 = mesh2.edges[e2].a, b2 = mesh2.edges[e2].b;
        if ((mesh2.vertices[a2] - mesh1.vertices[ed1.a]).norm() > tol) std::swap(a2, b2);
        const double len = skeleton.length[e1];
        for (std::size_t r = 0; r < edge_rule.points.size(); ++r) {
            const double t = edge_rule.points[r];
            const double diff = (1.0 - t) * sol.uhat[ed1.a] + t * sol.uhat[ed1.b] -
                                ((1.0 - t) * sol.u2[a2] + t * sol.u2[b2]);
            jump2 += edge_rule.weights[r] * len * diff * diff;
        }
    }
    rep.jump_L2 = std::sqrt(jump2);
    return rep;
}

/// Energy error computed the second way: per element, solve for the Riesz
/// representer e = G^{-1}(f - B x) and integrate the V-norm of the represented
/// test function directly. Agrees with the residual form up to roundoff.
inline double energy_error_riesz_norm(const SolutionVector& sol, const ProblemDef& p,
                                      const Mesh& mesh1, const Skeleton& skeleton,
                                      const QuadOptions& quad = {}, double kappa = 1.0) {
    const TriangleRule asm_rule = triangle_quadrature(quad.volume_degree);
    const EdgeRule edge_rule = edge_quadrature(quad.edge_points);
    // the V-norm integrands are polynomials of degree four
    const TriangleRule norm_rule = triangle_quadrature(std::max(4, quad.volume_degree));

    double total = 0.0;
    for (int t = 0; t < mesh1.num_triangles(); ++t) {
        const ElementGeometry geom(mesh1, t);
        const Mat18 G = local_gram(geom, asm_rule);
        const Mat18x9 B =
            local_b_matrix(geom, skeleton.sign[t], p.coeff, asm_rule, edge_rule);
        const Vec18 fT = local_load(geom, p.exact.f, asm_rule);
        Vec9 xT;
        const auto& tr = mesh1.triangles[t];
        xT << sol.u1[t], sol.sigma[t].x(), sol.sigma[t].y(), sol.uhat[tr.v[0]],
            sol.uhat[tr.v[1]], sol.uhat[tr.v[2]], sol.sighat[tr.edge[0]],
            sol.sighat[tr.edge[1]], sol.sighat[tr.edge[2]];
        Eigen::LLT<Mat18> llt(G);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("energy_error_riesz_norm: Gram matrix not SPD");
        const Vec18 e = llt.solve((fT - B * xT).eval());

        const auto p2 = eval_basis(BasisFamily::P2, norm_rule.points);
        for (std::size_t q = 0; q < norm_rule.points.size(); ++q) {
            const double wq = norm_rule.weights[q] * geom.det;
            double v = 0.0, div_tau = 0.0;
            Eigen::Vector2d grad_v = Eigen::Vector2d::Zero();
            Eigen::Vector2d tau = Eigen::Vector2d::Zero();
            for (int i = 0; i < 6; ++i) {
                const Eigen::Vector2d gi =
                    geom.jac_inv_T * Eigen::Vector2d(p2.grad_x(i, q), p2.grad_y(i, q));
                v += e(i) * p2.value(i, q);
                grad_v += e(i) * gi;
                tau.x() += e(6 + i) * p2.value(i, q);
                tau.y() += e(12 + i) * p2.value(i, q);
                div_tau += e(6 + i) * gi.x() + e(12 + i) * gi.y();
            }
            total += wq * (v * v + grad_v.squaredNorm() + tau.squaredNorm() +
                           div_tau * div_tau);
        }
    }
    return kappa * std::sqrt(total);
}

/// Empirical convergence rates between consecutive refinement levels,
/// log(e_i/e_{i+1}) / log(N_{i+1}/N_i). A rate is unset where an error vanishes.
struct EocRow {
    std::optional<double> u1, sigma, u2, uhat, sighat, energy, jump;
};

inline std::vector<EocRow> eoc(const std::vector<ErrorReport>& reports) {
    if (reports.size() < 2) throw std::invalid_argument("eoc: need at least two reports");
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].N <= reports[i - 1].N)
            throw std::invalid_argument("eoc: N must be strictly increasing");

    std::vector<EocRow> rates;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double dlogN = std::log(double(reports[i].N) / reports[i - 1].N);
        auto rate = [dlogN](double prev, double next) -> std::optional<double> {
            if (prev <= 0.0 || next <= 0.0) return std::nullopt;
            return std::log(prev / next) / dlogN;
        };
        EocRow row;
        row.u1 = rate(reports[i - 1].err_u1, reports[i].err_u1);
        row.sigma = rate(reports[i - 1].err_sigma, reports[i].err_sigma);
        row.u2 = rate(reports[i - 1].err_u2, reports[i].err_u2);
        row.uhat = rate(reports[i - 1].err_uhat, reports[i].err_uhat);
        row.sighat = rate(reports[i - 1].err_sighat, reports[i].err_sighat);
        row.energy = rate(reports[i - 1].err_energy, reports[i].err_energy);
        row.jump = rate(reports[i - 1].jump_L2, reports[i].jump_L2);
        rates.push_back(row);
    }
    return rates;
}

} // namespace dpgfem

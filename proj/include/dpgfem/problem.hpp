#pragma once

#include "dpgfem/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace dpgfem {

using ScalarField = std::function<double(const Eigen::Vector2d&)>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

/// Coefficients of the operator div(-alpha grad u + beta u) + gamma u.
/// alpha_inv_T is the inverse transpose of alpha, needed by the ultra-weak form.
struct CoefficientFields {
    MatrixField alpha;
    MatrixField alpha_inv_T;
    VectorField beta;
    ScalarField div_beta;
    ScalarField gamma;
};

/// Manufactured solution with the derived closures. By construction
/// sigma = alpha*grad_u - beta*u and div_sigma = gamma*u - f.
struct ExactSolution {
    ScalarField u;
    VectorField grad_u;
    VectorField sigma;
    ScalarField div_sigma;
    ScalarField f;
};

struct ProblemDef {
    Rect domain1, domain2;
    CoefficientFields coeff;
    ExactSolution exact;
    bool homogeneous_dirichlet = true;
};

namespace detail {

inline ExactSolution close_exact(ScalarField u, VectorField grad_u, const CoefficientFields& c,
                                 ScalarField f) {
    ExactSolution ex;
    ex.u = u;
    ex.grad_u = grad_u;
    ex.sigma = [u, grad_u, c](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        return c.alpha(p) * grad_u(p) - c.beta(p) * u(p);
    };
    ex.div_sigma = [u, f, c](const Eigen::Vector2d& p) { return c.gamma(p) * u(p) - f(p); };
    ex.f = std::move(f);
    return ex;
}

} // namespace detail

/// u = x(2-x) y(1-y) on (0,1)^2 and (1,2)x(0,1); alpha = id, beta = (xy, 1),
/// gamma = 1 - sin(pi x). Homogeneous Dirichlet data.
inline ProblemDef experiment1() {
    CoefficientFields c;
    c.alpha = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity().eval(); };
    c.alpha_inv_T = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity().eval(); };
    c.beta = [](const Eigen::Vector2d& p) { return Eigen::Vector2d(p.x() * p.y(), 1.0); };
    c.div_beta = [](const Eigen::Vector2d& p) { return p.y(); };
    c.gamma = [](const Eigen::Vector2d& p) { return 1.0 - std::sin(M_PI * p.x()); };

    auto u = [](const Eigen::Vector2d& p) {
        return p.x() * (2.0 - p.x()) * p.y() * (1.0 - p.y());
    };
    auto grad_u = [](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        const double x = p.x(), y = p.y();
        return {(2.0 - 2.0 * x) * y * (1.0 - y), x * (2.0 - x) * (1.0 - 2.0 * y)};
    };
    // f = -lap(u) + div(beta) u + beta.grad(u) + gamma u
    auto f = [c, u, grad_u](const Eigen::Vector2d& p) {
        const double x = p.x(), y = p.y();
        const double lap = -2.0 * y * (1.0 - y) - 2.0 * x * (2.0 - x);
        return -lap + c.div_beta(p) * u(p) + c.beta(p).dot(grad_u(p)) + c.gamma(p) * u(p);
    };

    ProblemDef prob;
    prob.domain1 = {0.0, 1.0, 0.0, 1.0};
    prob.domain2 = {1.0, 2.0, 0.0, 1.0};
    prob.coeff = c;
    prob.exact = detail::close_exact(u, grad_u, c, f);
    prob.homogeneous_dirichlet = true;
    return prob;
}

/// u = atan((1-|x|)/eps) with eps = 0.05 on (0.2,0.7)x(0.2,1.2) and
/// (0.7,1.2)x(0.2,1.2); alpha = eps id, beta = e^x (sin y, cos y), gamma = 0.
/// The solution has a curved interior layer and inhomogeneous Dirichlet data.
inline ProblemDef experiment2(double eps = 0.05) {
    CoefficientFields c;
    c.alpha = [eps](const Eigen::Vector2d&) {
        return (eps * Eigen::Matrix2d::Identity()).eval();
    };
    c.alpha_inv_T = [eps](const Eigen::Vector2d&) {
        return (Eigen::Matrix2d::Identity() / eps).eval();
    };
    c.beta = [](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        return std::exp(p.x()) * Eigen::Vector2d(std::sin(p.y()), std::cos(p.y()));
    };
    c.div_beta = [](const Eigen::Vector2d&) { return 0.0; };
    c.gamma = [](const Eigen::Vector2d&) { return 0.0; };

    auto u = [eps](const Eigen::Vector2d& p) { return std::atan((1.0 - p.norm()) / eps); };
    auto grad_u = [eps](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        const double r = p.norm();
        const double g = (1.0 - r) / eps;
        return -p / (eps * r * (1.0 + g * g));
    };
    // lap(u) = -w/(eps r) - 2 g w^2/eps^2 with g = (1-r)/eps, w = 1/(1+g^2)
    auto f = [c, grad_u, eps](const Eigen::Vector2d& p) {
        const double r = p.norm();
        const double g = (1.0 - r) / eps;
        const double w = 1.0 / (1.0 + g * g);
        const double lap = -w / (eps * r) - 2.0 * g * w * w / (eps * eps);
        return -eps * lap + c.beta(p).dot(grad_u(p));
    };

    ProblemDef prob;
    prob.domain1 = {0.2, 0.7, 0.2, 1.2};
    prob.domain2 = {0.7, 1.2, 0.2, 1.2};
    prob.coeff = c;
    prob.exact = detail::close_exact(u, grad_u, c, f);
    prob.homogeneous_dirichlet = false;
    return prob;
}

/// Maximal violations of the closure identities, sampled at quasi-random
/// interior points of both subdomains. Report-only; nothing is thrown.
struct ProblemValidation {
    double max_alpha_identity = 0.0;   // |alpha * alpha_inv_T^T - id|
    double min_alpha_eigenvalue = 0.0; // smallest eigenvalue of sym(alpha)
    double max_sigma_consistency = 0.0; // |sigma - (alpha grad_u - beta u)|
    double max_grad_consistency = 0.0;  // |FD(u) - grad_u|
    double max_div_consistency = 0.0;   // |FD(sigma) - (gamma u - f)|
    double max_boundary_value = 0.0;    // |u| on the outer boundary (homogeneous only)
};

namespace detail {

inline double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

// fourth-order central difference of a scalar field along coordinate axis k
template <class F>
double fd4(const F& field, const Eigen::Vector2d& p, int k, double step) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[k] = 1.0;
    return (-field(p + 2.0 * step * e) + 8.0 * field(p + step * e) -
            8.0 * field(p - step * e) + field(p - 2.0 * step * e)) /
           (12.0 * step);
}

} // namespace detail

inline ProblemValidation validate_problem(const ProblemDef& p, int nsamples) {
    ProblemValidation rep;
    rep.min_alpha_eigenvalue = std::numeric_limits<double>::infinity();
    const double step = 1e-4; // balances fourth-order truncation against roundoff

    auto sample_rect = [&](const Rect& r, int i) -> Eigen::Vector2d {
        // keep clear of the boundary so the FD stencils stay inside smooth territory
        const double margin = 0.05;
        const double sx = margin + (1.0 - 2.0 * margin) * detail::halton(i + 1, 2);
        const double sy = margin + (1.0 - 2.0 * margin) * detail::halton(i + 1, 3);
        return {r.x0 + sx * r.width(), r.y0 + sy * r.height()};
    };

    for (int i = 0; i < nsamples; ++i) {
        const Eigen::Vector2d x = sample_rect(i % 2 == 0 ? p.domain1 : p.domain2, i / 2);

        const Eigen::Matrix2d a = p.coeff.alpha(x);
        rep.max_alpha_identity = std::max(
            rep.max_alpha_identity,
            (a * p.coeff.alpha_inv_T(x).transpose() - Eigen::Matrix2d::Identity())
                .cwiseAbs()
                .maxCoeff());
        const Eigen::Matrix2d sym = 0.5 * (a + a.transpose());
        rep.min_alpha_eigenvalue = std::min(
            rep.min_alpha_eigenvalue,
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues().minCoeff());

        const Eigen::Vector2d sig = p.exact.sigma(x);
        const Eigen::Vector2d sig_def = a * p.exact.grad_u(x) - p.coeff.beta(x) * p.exact.u(x);
        rep.max_sigma_consistency =
            std::max(rep.max_sigma_consistency, (sig - sig_def).cwiseAbs().maxCoeff());

        for (int k = 0; k < 2; ++k) {
            const double fd = detail::fd4(p.exact.u, x, k, step);
            rep.max_grad_consistency =
                std::max(rep.max_grad_consistency, std::abs(fd - p.exact.grad_u(x)[k]));
        }

        auto sig_x = [&](const Eigen::Vector2d& q) { return p.exact.sigma(q).x(); };
        auto sig_y = [&](const Eigen::Vector2d& q) { return p.exact.sigma(q).y(); };
        const double div_fd = detail::fd4(sig_x, x, 0, step) + detail::fd4(sig_y, x, 1, step);
        rep.max_div_consistency =
            std::max(rep.max_div_consistency, std::abs(div_fd - p.exact.div_sigma(x)));
    }

    if (p.homogeneous_dirichlet) {
        auto outer = [&](double t) -> Eigen::Vector2d {
            // walk the outer boundary of the union of the two rectangles;
            // only valid for the side-by-side decompositions used here
            const double x0 = std::min(p.domain1.x0, p.domain2.x0);
            const double x1 = std::max(p.domain1.x1, p.domain2.x1);
            const double y0 = p.domain1.y0, y1 = p.domain1.y1;
            const double s = 4.0 * t;
            if (s < 1.0) return {x0 + s * (x1 - x0), y0};
            if (s < 2.0) return {x1, y0 + (s - 1.0) * (y1 - y0)};
            if (s < 3.0) return {x1 - (s - 2.0) * (x1 - x0), y1};
            return {x0, y1 - (s - 3.0) * (y1 - y0)};
        };
        for (int i = 0; i < nsamples; ++i) {
            const Eigen::Vector2d x = outer(detail::halton(i + 1, 2));
            rep.max_boundary_value = std::max(rep.max_boundary_value, std::abs(p.exact.u(x)));
        }
    }
    return rep;
}

} // namespace dpgfem

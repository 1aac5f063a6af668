#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpgfem {

/// Quadrature rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
/// Weights are positive and sum to the reference area 1/2.
struct TriangleRule {
    int degree = 0;
    std::vector<Eigen::Vector2d> points;
    std::vector<double> weights;
};

/// Gauss rule on the unit interval [0,1], exact up to degree 2*npoints-1.
struct EdgeRule {
    int npoints = 0;
    std::vector<double> points;
    std::vector<double> weights;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // evaluate P_n and P_n' via the three-term recurrence
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

/// Gauss rule on [0,1] with `npoints` in [1,10].
inline EdgeRule edge_quadrature(int npoints) {
    if (npoints < 1 || npoints > 10)
        throw std::invalid_argument("edge_quadrature: npoints must be in [1,10]");
    std::vector<double> xs, ws;
    detail::gauss_legendre(npoints, xs, ws);
    EdgeRule rule;
    rule.npoints = npoints;
    rule.points.resize(npoints);
    rule.weights.resize(npoints);
    for (int i = 0; i < npoints; ++i) {
        rule.points[i] = 0.5 * (xs[i] + 1.0);
        rule.weights[i] = 0.5 * ws[i];
    }
    return rule;
}

/// Rule exact for all polynomials of total degree <= `degree` (in [1,10]) on the
/// reference triangle. Built as a collapsed tensor product: x = s, y = t(1-s)
/// with the Jacobian (1-s) folded into the weights, so all weights stay positive.
inline TriangleRule triangle_quadrature(int degree) {
    if (degree < 1 || degree > 10)
        throw std::invalid_argument("triangle_quadrature: degree must be in [1,10]");
    // the s-direction integrand picks up one extra degree from the Jacobian
    const int n = (degree + 3) / 2;
    std::vector<double> xs, ws;
    detail::gauss_legendre(n, xs, ws);
    TriangleRule rule;
    rule.degree = degree;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        const double s = 0.5 * (xs[i] + 1.0);
        const double wi = 0.5 * ws[i];
        for (int j = 0; j < n; ++j) {
            const double t = 0.5 * (xs[j] + 1.0);
            const double wj = 0.5 * ws[j];
            rule.points.emplace_back(s, t * (1.0 - s));
            rule.weights.push_back(wi * wj * (1.0 - s));
        }
    }
    return rule;
}

} // namespace dpgfem

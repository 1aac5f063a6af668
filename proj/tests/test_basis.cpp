#include "dpgfem/basis.hpp"
#include "dpgfem/quadrature.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

using namespace dpgfem;
using Eigen::Vector2d;

TEST_CASE("P1 has the Lagrange property at the vertices", "[basis]") {
    const std::vector<Vector2d> nodes = {{0, 0}, {1, 0}, {0, 1}};
    const auto b = eval_basis(BasisFamily::P1, nodes);
    for (int i = 0; i < 3; ++i)
        for (int q = 0; q < 3; ++q)
            CHECK(b.value(i, q) == Catch::Approx(i == q ? 1.0 : 0.0).margin(1e-15));
}

TEST_CASE("P2 has the Lagrange property at its six nodes", "[basis]") {
    const std::vector<Vector2d> nodes = {{0, 0},     {1, 0},     {0, 1},
                                         {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
    const auto b = eval_basis(BasisFamily::P2, nodes);
    for (int i = 0; i < 6; ++i)
        for (int q = 0; q < 6; ++q)
            CHECK(b.value(i, q) == Catch::Approx(i == q ? 1.0 : 0.0).margin(1e-15));
}

TEST_CASE("P2 partition of unity", "[basis]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector2d> pts = {{1.0 / 3.0, 1.0 / 3.0}};
    for (int i = 0; i < 20; ++i) {
        const double x = unit(rng), y = unit(rng) * (1.0 - x);
        pts.emplace_back(x, y);
    }
    const auto b = eval_basis(BasisFamily::P2, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        double sum = 0.0, gx = 0.0, gy = 0.0;
        for (int i = 0; i < 6; ++i) {
            sum += b.value(i, q);
            gx += b.grad_x(i, q);
            gy += b.grad_y(i, q);
        }
        CHECK(sum == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(gx) < 1e-13);
        CHECK(std::abs(gy) < 1e-13);
    }
}

TEST_CASE("RT0 unit flux normalization on the reference edges", "[basis]") {
    // reference edges (v0,v1), (v1,v2), (v2,v0) with outward normals
    const Vector2d a[3] = {{0, 0}, {1, 0}, {0, 1}};
    const Vector2d b[3] = {{1, 0}, {0, 1}, {0, 0}};
    const Vector2d n[3] = {{0, -1},
                           {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)},
                           {-1, 0}};
    const auto rule = edge_quadrature(4);
    for (int e = 0; e < 3; ++e) {
        std::vector<Vector2d> pts;
        for (double t : rule.points) pts.push_back(a[e] + t * (b[e] - a[e]));
        const auto basis = eval_basis(BasisFamily::RT0, pts);
        const double len = (b[e] - a[e]).norm();
        for (int f = 0; f < 3; ++f) {
            double flux = 0.0;
            for (std::size_t q = 0; q < pts.size(); ++q)
                flux += rule.weights[q] * len *
                        (basis.vec_x(f, q) * n[e].x() + basis.vec_y(f, q) * n[e].y());
            CHECK(flux == Catch::Approx(f == e ? 1.0 : 0.0).margin(1e-14));
        }
    }
}

TEST_CASE("RT0 divergence is constant 2 on the reference element", "[basis]") {
    const std::vector<Vector2d> pts = {{0.2, 0.3}, {0.1, 0.05}};
    const auto basis = eval_basis(BasisFamily::RT0, pts);
    for (int f = 0; f < 3; ++f)
        for (int q = 0; q < 2; ++q) CHECK(basis.divergence(f, q) == 2.0);
}

TEST_CASE("P0 is constant one", "[basis]") {
    const std::vector<Vector2d> pts = {{0.25, 0.25}};
    const auto basis = eval_basis(BasisFamily::P0, pts);
    CHECK(basis.value(0, 0) == 1.0);
    CHECK(basis.grad_x(0, 0) == 0.0);
}

#include <doctest.h>

#include <cmath>

#include "fpm/interpolate.hpp"

using namespace fpm;

TEST_CASE("interpolate: cubic polynomials reproduced exactly inside a patch")
{
    const GridSpec grid(1, 64, 8.0, {-1.0, 0.0, 0.0});
    auto poly = [](double x) { return 0.3 * x * x * x - 1.2 * x * x + 0.5 * x + 2.0; };
    ScalarField f(grid.size());
    for (int j = 0; j < grid.n; ++j) f[j] = poly(grid.coord(0, j));
    // Queries well inside the period (the wrap stencil sees the non-polynomial seam).
    for (double x : {1.01, 2.37, 3.5, 4.99}) {
        CHECK(interpolate(grid, f, {x, 0.0, 0.0}) == doctest::Approx(poly(x)).epsilon(1e-13));
    }
}

TEST_CASE("interpolate: node queries return nodal values")
{
    const GridSpec grid(2, 16, 2.0, {0.25, -0.5, 0.0});
    ScalarField f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(0.37 * static_cast<double>(i));
    for (int ix : {0, 3, 15}) {
        for (int iy : {0, 7, 15}) {
            const double got = interpolate(grid, f, {grid.coord(0, ix), grid.coord(1, iy), 0.0});
            CHECK(got == doctest::Approx(f[grid.flatten(ix, iy)]).epsilon(1e-14));
        }
    }
}

TEST_CASE("interpolate: periodic wrap")
{
    const GridSpec grid(1, 32, 2.0 * M_PI);
    ScalarField f(grid.size());
    for (int j = 0; j < grid.n; ++j) f[j] = std::sin(grid.coord(0, j));
    const double a = interpolate(grid, f, {0.1, 0.0, 0.0});
    const double b = interpolate(grid, f, {0.1 + 2.0 * M_PI, 0.0, 0.0});
    const double c = interpolate(grid, f, {0.1 - 2.0 * M_PI, 0.0, 0.0});
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
    CHECK(a == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("interpolate: fourth-order error decay on smooth data")
{
    // max |error| <= C dx^4 over a set of off-node queries: halving dx
    // shrinks the worst error ~16x.
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
        const GridSpec grid(1, n, 2.0 * M_PI);
        ScalarField f(grid.size());
        for (int j = 0; j < grid.n; ++j) f[j] = std::sin(grid.coord(0, j));
        double err = 0.0;
        for (int q = 0; q < 200; ++q) {
            const double x = 0.123 + q * (2.0 * M_PI - 0.3) / 200.0;
            err = std::max(err, std::abs(interpolate(grid, f, {x, 0.0, 0.0}) - std::sin(x)));
        }
        if (prev > 0.0) {
            const double ratio = prev / err;
            CHECK(ratio > 12.0);
            CHECK(ratio < 20.0);
        }
        prev = err;
    }

    prev = 0.0;
    for (int n : {32, 64, 128}) {
        const GridSpec grid(2, n, 2.0 * M_PI);
        ScalarField f(grid.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto p = grid.node(i);
            f[i] = std::sin(p[0]) * std::cos(2.0 * p[1]);
        }
        double err = 0.0;
        for (int q = 0; q < 100; ++q) {
            const double x = 0.234 + q * 0.0613, y = 2.345 + q * 0.0217;
            const double exact = std::sin(x) * std::cos(2.0 * y);
            err = std::max(err, std::abs(interpolate(grid, f, {x, y, 0.0}) - exact));
        }
        if (prev > 0.0) CHECK(prev / err > 10.0);
        prev = err;
    }
}

TEST_CASE("interpolate: tricubic matches separable products")
{
    const GridSpec grid(3, 32, 2.0 * M_PI);
    ScalarField f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto p = grid.node(i);
        f[i] = std::sin(p[0]) * std::cos(p[1]) * std::sin(2.0 * p[2]);
    }
    const double x = 0.71, y = 4.2, z = 2.9;
    const double exact = std::sin(x) * std::cos(y) * std::sin(2.0 * z);
    CHECK(std::abs(interpolate(grid, f, {x, y, z}) - exact) < 5e-4);  // O(dx^4) at N=32
}

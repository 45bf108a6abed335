#include <doctest.h>

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "fpm/spectral.hpp"
#include "testutil.hpp"

using namespace fpm;
using testutil::max_abs;
using testutil::max_abs_diff;

TEST_CASE("wavenumbers: frozen small tables")
{
    const auto k4 = wavenumbers(4, 2.0 * M_PI);
    REQUIRE(k4.size() == 4);
    CHECK(k4[0] == doctest::Approx(0.0));
    CHECK(k4[1] == doctest::Approx(1.0));
    CHECK(k4[2] == doctest::Approx(2.0));
    CHECK(k4[3] == doctest::Approx(-1.0));

    const auto k2 = wavenumbers(2, 2.0 * M_PI);
    CHECK(k2[0] == doctest::Approx(0.0));
    CHECK(k2[1] == doctest::Approx(1.0));

    const auto k8 = wavenumbers(8, 16.0);
    const double expected[8] = {0.0,          M_PI / 8.0,  M_PI / 4.0, 3.0 * M_PI / 8.0,
                                M_PI / 2.0, -3.0 * M_PI / 8.0, -M_PI / 4.0, -M_PI / 8.0};
    for (int l = 0; l < 8; ++l) CHECK(k8[l] == doctest::Approx(expected[l]).epsilon(1e-15));

    CHECK_THROWS_AS(wavenumbers(5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(wavenumbers(4, 0.0), std::invalid_argument);
}

TEST_CASE("wavenumbers: antisymmetry across the Nyquist split")
{
    for (int n : {8, 16, 64}) {
        const auto k = wavenumbers(n, 3.7);
        for (int l = 1; l < n / 2; ++l) CHECK(k[l] == doctest::Approx(-k[n - l]).epsilon(1e-15));
    }
}

TEST_CASE("spectral_derivative: band-limited exactness")
{
    const GridSpec grid(1, 16, 2.0 * M_PI);
    ScalarField f(grid.size()), expect(grid.size());
    for (int j = 0; j < grid.n; ++j) {
        f[j] = std::sin(grid.coord(0, j));
        expect[j] = std::cos(grid.coord(0, j));
    }
    const auto df = spectral_derivative(grid, f, 0, 1);
    CHECK(max_abs_diff(df, expect) < 1e-12);

    ScalarField c(grid.size(), 3.25);
    CHECK(max_abs(spectral_derivative(grid, c, 0, 1)) < 1e-13);
    CHECK(max_abs(spectral_derivative(grid, c, 0, 2)) < 1e-12);
}

TEST_CASE("spectral_derivative: single-mode filter factor")
{
    const GridSpec grid(1, 16, 2.0 * M_PI);
    ScalarField f(grid.size());
    for (int j = 0; j < grid.n; ++j) f[j] = std::sin(grid.coord(0, j));
    const auto df = spectral_derivative(grid, f, 0, 1, 16.0);
    const double factor = std::exp(-16.0 / 256.0);
    for (int j = 0; j < grid.n; ++j)
        CHECK(df[j] == doctest::Approx(factor * std::cos(grid.coord(0, j))).epsilon(1e-12));
}

TEST_CASE("spectral_derivative: linearity and first-applied-twice equals second")
{
    const GridSpec grid(2, 32, 5.0, {-1.0, 0.5, 0.0});
    const auto f = testutil::random_bandlimited(grid, 11);
    const auto g = testutil::random_bandlimited(grid, 22);
    const double a = 1.37, b = -0.61;

    for (int axis : {0, 1}) {
        ScalarField combo(grid.size());
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * f[i] + b * g[i];
        const auto d_combo = spectral_derivative(grid, combo, axis, 1);
        const auto df = spectral_derivative(grid, f, axis, 1);
        const auto dg = spectral_derivative(grid, g, axis, 1);
        double worst = 0.0;
        for (std::size_t i = 0; i < combo.size(); ++i)
            worst = std::max(worst, std::abs(d_combo[i] - a * df[i] - b * dg[i]));
        CHECK(worst < 1e-11);

        const auto d2 = spectral_derivative(grid, f, axis, 2);
        const auto d1d1 = spectral_derivative(grid, df, axis, 1);
        CHECK(max_abs_diff(d2, d1d1) < 1e-10);
    }
}

TEST_CASE("project_divergence_free: divergence-free input unchanged")
{
    const GridSpec grid(2, 32, 2.0 * M_PI);
    // E = curl of a scalar potential -> divergence free.
    ScalarField psi = testutil::random_bandlimited(grid, 5);
    std::vector<ScalarField> E = {spectral_derivative(grid, psi, 1, 1), spectral_derivative(grid, psi, 0, 1)};
    for (auto& v : E[1]) v = -v;
    const auto out = project_divergence_free(grid, E, {});
    CHECK(max_abs_diff(out[0], E[0]) < 1e-12);
    CHECK(max_abs_diff(out[1], E[1]) < 1e-12);
}

TEST_CASE("project_divergence_free: pure gradient is annihilated")
{
    const GridSpec grid(2, 32, 2.0 * M_PI);
    ScalarField phi(grid.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const auto p = grid.node(i);
        phi[i] = std::sin(p[0]) * std::sin(p[1]);
    }
    const std::vector<ScalarField> E = {spectral_derivative(grid, phi, 0, 1),
                                        spectral_derivative(grid, phi, 1, 1)};
    const auto out = project_divergence_free(grid, E, {});
    CHECK(max_abs(out[0]) < 1e-12);
    CHECK(max_abs(out[1]) < 1e-12);
}

TEST_CASE("project_divergence_free: idempotent and annihilates divergence with chi == 0")
{
    const GridSpec grid(2, 16, 4.0);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<ScalarField> E(2, grid.make_field());
    for (auto& c : E)
        for (auto& v : c) v = dist(rng);

    const auto once = project_divergence_free(grid, E, {});
    const auto twice = project_divergence_free(grid, once, {});
    CHECK(max_abs_diff(once[0], twice[0]) < 1e-12);
    CHECK(max_abs_diff(once[1], twice[1]) < 1e-12);
    CHECK(max_abs(divergence(grid, once)) < 1e-10);
}

// Dense-matrix oracle at N=8: the whole projection assembled from explicit
// DFT matrices and diagonal symbols, applied to a random field with the
// circular-hole mask.
TEST_CASE("project_divergence_free: dense-matrix oracle at N=8")
{
    using C = std::complex<double>;
    const int n = 8;
    const GridSpec grid(2, n, 2.0 * M_PI);
    const std::size_t npts = grid.size();

    // chi of a small circular hole centered in the box.
    ScalarField chi = grid.make_field();
    for (std::size_t i = 0; i < npts; ++i) {
        const auto p = grid.node(i);
        if (std::hypot(p[0] - M_PI, p[1] - M_PI) <= 1.5) chi[i] = 1.0;
    }

    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<ScalarField> E(2, grid.make_field());
    for (auto& c : E)
        for (auto& v : c) v = dist(rng);

    // Explicit 2D DFT matrix (kron of two 1D DFTs) and diagonal derivative symbols.
    Eigen::MatrixXcd F1(n, n);
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) F1(l, j) = std::exp(C(0.0, -2.0 * M_PI * l * j / n));
    Eigen::MatrixXcd F(npts, npts);
    for (int lx = 0; lx < n; ++lx)
        for (int ly = 0; ly < n; ++ly)
            for (int jx = 0; jx < n; ++jx)
                for (int jy = 0; jy < n; ++jy)
                    F(lx * n + ly, jx * n + jy) = F1(lx, jx) * F1(ly, jy);
    const Eigen::MatrixXcd Finv = F.inverse();

    const auto k = wavenumbers(n, grid.extent);
    auto kt = [&](int l) { return l == n / 2 ? 0.0 : k[l]; };
    Eigen::VectorXcd dx_sym(npts), dy_sym(npts);
    Eigen::VectorXd k2(npts);
    for (int lx = 0; lx < n; ++lx)
        for (int ly = 0; ly < n; ++ly) {
            dx_sym(lx * n + ly) = C(0.0, kt(lx));
            dy_sym(lx * n + ly) = C(0.0, kt(ly));
            k2(lx * n + ly) = kt(lx) * kt(lx) + kt(ly) * kt(ly);
        }

    Eigen::VectorXcd Ex(npts), Ey(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        Ex(i) = E[0][i];
        Ey(i) = E[1][i];
    }
    Eigen::VectorXcd div = Finv * (dx_sym.asDiagonal() * (F * Ex)) +
                           Finv * (dy_sym.asDiagonal() * (F * Ey));
    for (std::size_t i = 0; i < npts; ++i) div(i) *= 1.0 - chi[i];
    Eigen::VectorXcd p_hat = F * div;
    for (std::size_t i = 0; i < npts; ++i) p_hat(i) = k2(i) > 0.0 ? -p_hat(i) / k2(i) : C(0.0);
    const Eigen::VectorXcd gx = Finv * (dx_sym.asDiagonal() * p_hat);
    const Eigen::VectorXcd gy = Finv * (dy_sym.asDiagonal() * p_hat);

    const auto out = project_divergence_free(grid, E, chi);
    double worst = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        worst = std::max(worst, std::abs(out[0][i] - (Ex(i) - gx(i)).real()));
        worst = std::max(worst, std::abs(out[1][i] - (Ey(i) - gy(i)).real()));
    }
    CHECK(worst < 1e-10);

    // Masked divergence norm decreases.
    const auto div_before = divergence(grid, E);
    const auto div_after = divergence(grid, out);
    double nb = 0.0, na = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        nb = std::max(nb, std::abs(div_before[i]) * (1.0 - chi[i]));
        na = std::max(na, std::abs(div_after[i]) * (1.0 - chi[i]));
    }
    CHECK(na < nb);
}

#include "fpm/penalty.hpp"

#include <cmath>

#include "fpm/interpolate.hpp"
#include "fpm/spectral.hpp"

namespace fpm {

DerivProvider spectral_deriv_provider(std::optional<double> c_f)
{
    return [c_f](const GridSpec& grid, const ScalarField& f, int axis, int order) {
        return spectral_derivative(grid, f, axis, order, c_f);
    };
}

std::array<double, 4> extension_basis(int m, double h, double L, double s)
{
    if (h <= 0.0 || L <= 0.0) throw std::invalid_argument("extension_basis: h and L must be positive");
    const double slack = 1e-12 * (h + L);
    if (s < -L - slack || s > h + slack) throw std::invalid_argument("extension_basis: s outside [-L, h]");

    std::array<double, 4> P{0.0, 0.0, 0.0, 0.0};
    const double sh = s - h;
    const double sL = s + L;
    switch (m) {
        case 0: {
            P[0] = -sh * sL * sL / (h * L * L);
            P[1] = s * sL * sL / (h * (h + L) * (h + L));
            break;
        }
        case 1: {
            const double hL3 = (h + L) * (h + L) * (h + L);
            const double sL3 = sL * sL * sL;
            P[0] = sL3 * sh * sh / (h * h * L * L * L);
            P[1] = s * sL3 / (h * hL3) * (1.0 - (4.0 * h + L) / (h * (h + L)) * sh);
            P[2] = s * sh * sL3 / (h * hL3);
            break;
        }
        case 2: {
            const double hL2 = (h + L) * (h + L);
            const double hL4 = hL2 * hL2;
            const double sL4 = sL * sL * sL * sL;
            P[0] = -sL4 * sh * sh * sh / (h * h * h * L * L * L * L);
            P[1] = s * sL4 / (h * hL4) *
                   (1.0 - (5.0 * h + L) / (h * (h + L)) * sh +
                    (15.0 * h * h + 6.0 * h * L + L * L) / (h * h * hL2) * sh * sh);
            P[2] = s * sh * sL4 / (h * hL4) * (1.0 - (5.0 * h + L) / (h * (h + L)) * sh);
            P[3] = s * sh * sh * sL4 / (2.0 * h * hL4);
            break;
        }
        default: throw std::invalid_argument("extension_basis: m must be 0, 1 or 2");
    }
    return P;
}

namespace {

std::array<double, 3> offset_point(const Vec3& y, const Vec3& n, double h)
{
    return {y[0] + h * n[0], y[1] + h * n[1], y[2] + h * n[2]};
}

ScalarField build_gtilde_scalar(const GridSpec& grid, const RayTable& rays, const PenaltyConfig& cfg,
                                const ScalarField& Ez, const ScalarBoundary& g, double t,
                                const DerivProvider& deriv, int max_m)
{
    if (cfg.m < 0 || cfg.m > max_m) throw std::invalid_argument("build_gtilde: unsupported m for this mode");
    const DerivProvider dp = deriv ? deriv : spectral_deriv_provider(cfg.c_f);

    std::vector<ScalarField> d1(static_cast<std::size_t>(grid.dim));
    ScalarField d2;
    if (cfg.m >= 1)
        for (int a = 0; a < grid.dim; ++a) d1[static_cast<std::size_t>(a)] = dp(grid, Ez, a, 1);
    if (cfg.m == 2) d2 = dp(grid, Ez, 0, 2);  // m = 2 is 1D only

    ScalarField gt = grid.make_field();
    for (const auto& ray : rays.rays) {
        const auto P = extension_basis(cfg.m, cfg.h, cfg.L, ray.s);
        const auto ph = offset_point(ray.y, ray.n, cfg.h);
        double value = g(ray.y, t) * P[0] + interpolate(grid, Ez, ph) * P[1];
        if (cfg.m >= 1) {
            double dEds = 0.0;  // (n . grad) Ez at y + h n
            for (int a = 0; a < grid.dim; ++a)
                dEds += ray.n[a] * interpolate(grid, d1[static_cast<std::size_t>(a)], ph);
            value += dEds * P[2];
        }
        if (cfg.m == 2) value += interpolate(grid, d2, ph) * P[3];
        gt[ray.index] = value;
    }
    return gt;
}

}  // namespace

ScalarField build_gtilde_1d(const GridSpec& grid, const RayTable& rays, const PenaltyConfig& cfg,
                            const ScalarField& Ez, const ScalarBoundary& g, double t,
                            const DerivProvider& deriv)
{
    if (grid.dim != 1) throw std::invalid_argument("build_gtilde_1d: 1D grids only");
    return build_gtilde_scalar(grid, rays, cfg, Ez, g, t, deriv, 2);
}

ScalarField build_gtilde_tm(const GridSpec& grid, const RayTable& rays, const PenaltyConfig& cfg,
                            const ScalarField& Ez, const ScalarBoundary& g, double t,
                            const DerivProvider& deriv)
{
    if (grid.dim != 2) throw std::invalid_argument("build_gtilde_tm: 2D grids only");
    return build_gtilde_scalar(grid, rays, cfg, Ez, g, t, deriv, 1);
}

std::vector<ScalarField> build_gtilde_vector(const GridSpec& grid, const RayTable& rays,
                                             const PenaltyConfig& cfg,
                                             const std::vector<ScalarField>& E,
                                             const VectorBoundary& g, double t)
{
    if (cfg.m != 0) throw std::invalid_argument("build_gtilde_vector: only m = 0 is supported");
    const int nc = static_cast<int>(E.size());
    if (nc != grid.dim) throw std::invalid_argument("build_gtilde_vector: need dim E components");

    std::vector<ScalarField> gt(static_cast<std::size_t>(nc));
    for (auto& c : gt) c = grid.make_field();

    for (const auto& ray : rays.rays) {
        const auto P = extension_basis(0, cfg.h, cfg.L, ray.s);
        const auto ph = offset_point(ray.y, ray.n, cfg.h);
        const std::array<double, 3> py{ray.y[0], ray.y[1], ray.y[2]};

        double E_dot_n = 0.0;
        std::array<double, 3> E_at_h{0.0, 0.0, 0.0};
        for (int c = 0; c < nc; ++c) {
            E_dot_n += ray.n[c] * interpolate(grid, E[static_cast<std::size_t>(c)], py);
            E_at_h[static_cast<std::size_t>(c)] = interpolate(grid, E[static_cast<std::size_t>(c)], ph);
        }
        const Vec3 gv = g(ray.y, t);
        double g_dot_n = 0.0;
        for (int c = 0; c < nc; ++c) g_dot_n += ray.n[c] * gv[c];

        // Normal part of E kept, tangential part replaced by g's.
        for (int c = 0; c < nc; ++c) {
            const double at_gamma = E_dot_n * ray.n[c] + gv[c] - g_dot_n * ray.n[c];
            gt[static_cast<std::size_t>(c)][ray.index] =
                at_gamma * P[0] + E_at_h[static_cast<std::size_t>(c)] * P[1];
        }
    }
    return gt;
}

}  // namespace fpm

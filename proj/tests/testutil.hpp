#pragma once

#include <cmath>
#include <random>

#include "fpm/grid.hpp"

namespace testutil {

inline double max_abs(const fpm::ScalarField& f)
{
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const fpm::ScalarField& a, const fpm::ScalarField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Random real field band-limited to |l| < N/4 per axis (no Nyquist content),
// so spectral identities hold to roundoff.
inline fpm::ScalarField random_bandlimited(const fpm::GridSpec& grid, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    fpm::ScalarField f = grid.make_field();
    const int kmax = std::max(1, grid.n / 4);
    const double two_pi = 2.0 * M_PI;
    const int nmodes = 6;
    for (int mode = 0; mode < nmodes; ++mode) {
        int l[3] = {0, 0, 0};
        for (int d = 0; d < grid.dim; ++d) l[d] = static_cast<int>(rng() % static_cast<unsigned>(kmax));
        const double a = amp(rng), phase = amp(rng) * M_PI;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto idx = grid.unflatten(i);
            double arg = phase;
            for (int d = 0; d < grid.dim; ++d)
                arg += two_pi * l[d] * idx[static_cast<std::size_t>(d)] / grid.n;
            f[i] += a * std::cos(arg);
        }
    }
    return f;
}

}  // namespace testutil

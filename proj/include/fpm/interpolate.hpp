#pragma once

// Local cubic (Lagrange 4-point, tensorized) interpolation off the periodic
// grid. Query coordinates wrap around the box.

#include <array>

#include "fpm/grid.hpp"

namespace fpm {

// Lagrange cubic basis on stencil offsets {-1, 0, 1, 2} evaluated at t in [0,1).
inline std::array<double, 4> cubic_weights(double t)
{
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -t * (t + 1.0) * (t - 2.0) / 2.0, t * (t + 1.0) * (t - 1.0) / 6.0};
}

double interpolate(const GridSpec& grid, const ScalarField& f, const std::array<double, 3>& point);

std::vector<double> interpolate(const GridSpec& grid, const ScalarField& f,
                                const std::vector<std::array<double, 3>>& points);

}  // namespace fpm

#pragma once

// Active penalty field g~: polynomial extensions of the evolved electric
// field along boundary rays, matching m derivatives at Gamma + h, the
// boundary data at Gamma, and decaying smoothly to zero at Gamma - L.

#include <array>
#include <complex>
#include <functional>
#include <optional>

#include "fpm/geometry.hpp"
#include "fpm/grid.hpp"

namespace fpm {

struct PenaltyConfig {
    double eta = 0.0;  // penalty strength
    double h = 0.0;    // matching offset
    double L = 0.0;    // decay length
    int m = 0;         // derivatives matched at Gamma + h (0, 1 or 2)
    std::optional<double> c_f = 16.0;  // filter for matching derivatives
};

using ScalarBoundary = std::function<double(const Vec3&, double)>;
using VectorBoundary = std::function<Vec3(const Vec3&, double)>;

// Derivative provider for the m >= 1 matching data; defaults to the filtered
// spectral derivative, replaced by finite differences in the comparator runs.
using DerivProvider = std::function<ScalarField(const GridSpec&, const ScalarField&, int axis, int order)>;

DerivProvider spectral_deriv_provider(std::optional<double> c_f);

// P_{m,0..m+1}(s); unused entries zero. s must lie in [-L, h].
std::array<double, 4> extension_basis(int m, double h, double L, double s);

// Second-derivative basis entry helper used only by the m = 2 construction.
ScalarField build_gtilde_1d(const GridSpec& grid, const RayTable& rays, const PenaltyConfig& cfg,
                            const ScalarField& Ez, const ScalarBoundary& g, double t,
                            const DerivProvider& deriv = {});

ScalarField build_gtilde_tm(const GridSpec& grid, const RayTable& rays, const PenaltyConfig& cfg,
                            const ScalarField& Ez, const ScalarBoundary& g, double t,
                            const DerivProvider& deriv = {});

// TE (dim 2, E = [Ex, Ey]) and full 3D (E = [Ex, Ey, Ez]); m = 0 only.
// At Gamma the normal component of E is kept and the tangential part is
// replaced by the tangential part of g.
std::vector<ScalarField> build_gtilde_vector(const GridSpec& grid, const RayTable& rays,
                                             const PenaltyConfig& cfg,
                                             const std::vector<ScalarField>& E,
                                             const VectorBoundary& g, double t);

}  // namespace fpm

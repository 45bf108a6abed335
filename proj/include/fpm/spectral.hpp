#pragma once

// FFT-based differentiation on the periodic grid, optional high-frequency
// filtering of the derivative symbol, and Helmholtz projection of the small
// spurious divergence outside the penalty band.

#include <complex>
#include <optional>
#include <vector>

#include "fpm/grid.hpp"

namespace fpm {

// d^order/dx_axis^order of f, computed as F^-1{ exp(-c_f k^2/N^2) (ik)^order F{f} }.
// The filter factor is omitted when filter_cf is empty. The Nyquist mode of
// odd-order derivatives is zeroed so real input maps to real output.
ScalarField spectral_derivative(const GridSpec& grid, const ScalarField& f, int axis, int order,
                                std::optional<double> filter_cf = std::nullopt);

// E <- E - grad p with p chosen so that the divergence of E, masked by
// (1 - chi_h), is removed. Uses the same Nyquist-zeroed first-derivative
// symbol as spectral_derivative throughout, so with chi_h == 0 the projection
// annihilates the masked divergence completely and is idempotent.
std::vector<ScalarField> project_divergence_free(const GridSpec& grid, const std::vector<ScalarField>& E,
                                                 const ScalarField& chi_h);

// Pointwise divergence of a vector field (spectral, unfiltered).
ScalarField divergence(const GridSpec& grid, const std::vector<ScalarField>& E);

// In-place complex DFT along one axis (inverse includes the 1/N factor).
// Exposed for tests; plan cache is internal and synchronized.
void dft_axis(const GridSpec& grid, int axis, std::vector<std::complex<double>>& data, bool inverse);

}  // namespace fpm

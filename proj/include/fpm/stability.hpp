#pragma once

// Dense discrete evolution operator assembled from the production RHS
// (penalty with homogeneous boundary data included) and its spectrum,
// checked against the RK4 stability region.

#include <Eigen/Dense>
#include <complex>

#include "fpm/equations.hpp"

namespace fpm {

struct DenseOperator {
    Eigen::MatrixXd A;  // column j = rhs(e_j) with g == 0
    int ncomp = 0;
    GridSpec grid;
};

// Requires homogeneous data: rhs(0) == 0 and rhs(alpha u) == alpha rhs(u)
// (spot-checked on random states; throws on failure).
DenseOperator assemble_operator(const Problem& problem);

struct EigenSpectrum {
    std::vector<std::complex<double>> values;
    Eigen::MatrixXcd vectors;  // right eigenvectors, column-aligned with values
};

// Dense nonsymmetric eigensolve (LAPACK dgeev); residuals ||Av - lambda v||
// of 10 sampled eigenpairs are validated against 1e-8 ||v||.
EigenSpectrum spectrum(const DenseOperator& op);

struct ContainmentReport {
    double max_amplification = 0.0;
    std::complex<double> worst = 0.0;  // lambda with largest |R(lambda dt)|^2
    std::size_t n_outside = 0;         // eigenvalues with amplification > 1 + slack
    double slack = 0.0;
};

ContainmentReport check_rk4_containment(const std::vector<std::complex<double>>& eigs, double dt,
                                        double slack = 1e-8);

}  // namespace fpm

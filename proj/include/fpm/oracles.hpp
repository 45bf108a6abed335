#pragma once

// Closed-form reference solutions for the test problems, Bessel functions of
// the first kind, and the analytic flat-wall reflection coefficient of the
// penalized TM system.

#include <complex>

#include "fpm/geometry.hpp"

namespace fpm {

struct PulseParams {
    double E0 = 1.0;
    double x0 = 7.0;
    double sigma = 0.7071067811865476;  // 1/sqrt(2)
    double omega0 = 10.0;
};

// Modulated Gaussian packet reflecting off the PEC wall at x = 0; fields are
// cut off by chi_0 (zero for x < 0).
void gaussian_1d_exact(double x, double t, const PulseParams& p, double& H_y, double& E_z);

// Manufactured solutions on [0, 2pi]^2 with forcing F = sin(x) cos(y) sin(t).
void manufactured_tm_exact(double x, double y, double t, double& H_x, double& H_y, double& E_z);
void manufactured_te_exact(double x, double y, double t, double& E_x, double& E_y, double& H_z);
double manufactured_forcing(double x, double y, double t);

// Bessel function of the first kind, integer order >= 0, x >= 0; accurate to
// 1e-10 relative for order <= 10, x <= 30 (power series at small x, downward
// recurrence with series normalization otherwise).
double bessel_j(int order, double x);

// j-th positive root of J_order (j >= 1), located by bisection on sign
// changes scanned at spacing 0.1.
double bessel_j_root(int order, int j);

// TM standing mode of the unit circular cavity. rho = 0 is handled by limit.
struct CavityFields {
    double H_rho, H_phi, E_z;
    double H_x, H_y;  // Cartesian components of the magnetic field
};
CavityFields cavity_mode_exact(int order, double alpha, double rho, double phi, double t);

// 3D standing wave, k = (1,1,1)/sqrt(3), E0 = (1,-2,1); periodic on [0,2pi]^3.
void standing_wave_3d_exact(const Vec3& x, double t, Vec3& E, Vec3& H);

// Reflection coefficient of the penalized flat-wall TM problem: solves the
// 2x2 matching system in (E0, R) for an incident unit-amplitude wave.
std::complex<double> reflection_matching(double eta, double h, double kx, double ky);

// Leading terms of its expansion in eta and h:
// (1 - 2 i h kx) - [2 sqrt(2) (1+i) kx / sqrt(w)] sqrt(eta) h + [2 kx (kx^2-4)/w] eta h.
std::complex<double> reflection_expansion(double eta, double h, double kx, double ky);

}  // namespace fpm

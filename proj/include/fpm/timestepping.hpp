#pragma once

// Classical RK4 with the penalty extension rebuilt at every stage, the
// post-step divergence projection for TE/3D modes, and per-step diagnostics.

#include <complex>
#include <utility>

#include "fpm/equations.hpp"

namespace fpm {

struct RunConfig {
    double dt = 0.0;        // explicit step; 0 means use dt_coeff * dx
    double dt_coeff = 0.0;
    double T = 0.0;         // final time (absolute)
    bool projection = true;         // applied for TE/3D modes only
    bool enforce_stability = true;  // reject dt above the RK4 bound
    int snapshot_stride = 0;        // 0: keep no intermediate snapshots
};

struct DiagRow {
    long step;
    double t, energy_physical, energy_total, max_div;
};

struct Trajectory {
    State state;
    double t_final = 0.0;
    std::vector<DiagRow> diagnostics;
    std::vector<std::pair<double, State>> snapshots;
};

// RK4 stability bound for the spectral wave operator: 2.83/(pi sqrt(dim)) * D/N.
double max_stable_dt(int dim, double extent, int n);

// |R(z)|^2 for the RK4 amplification polynomial R(z) = sum_{j<=4} z^j/j!.
// For z = i r this is 1 - r^6/72 + r^8/576.
double rk4_amplification(std::complex<double> z);

Trajectory evolve(const Problem& problem, const State& initial, const RunConfig& run);

}  // namespace fpm

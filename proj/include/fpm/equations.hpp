#pragma once

// Right-hand sides of the penalized Maxwell systems: 1D, TMz (optional
// forcing, optional stretched-coordinate PML with auxiliary Phi), TEz in
// split-field form with Berenger PML, and the full 3D system.

#include <functional>
#include <optional>
#include <string>

#include "fpm/geometry.hpp"
#include "fpm/grid.hpp"
#include "fpm/penalty.hpp"

namespace fpm {

enum class Mode { OneD, Tm, TmPml, Te, Full3d };

int component_count(Mode mode);
std::vector<std::string> component_names(Mode mode);

struct State {
    std::vector<ScalarField> c;

    static State zeros(Mode mode, const GridSpec& grid);
    void axpy(double a, const State& other);              // this += a * other
    void assign_axpy(const State& base, double a, const State& k);  // this = base + a * k
};

using ForcingFn = std::function<double(const Vec3&, double)>;

struct PmlProfile {
    ScalarField sigma_x, sigma_y;  // static spatial ramps (empty when unused)
    double ramp_time = 0.0;        // cubic temporal ramp reaches 1 at this time; 0 = none

    bool any() const { return !sigma_x.empty() || !sigma_y.empty(); }
    double ramp(double t) const;
};

// One linear slab per requested axis, flush against the periodic seam and
// rising linearly from 0 at the inner edge to sigma_max at the seam.
// sigma_max <= 0 disables the axis.
PmlProfile build_pml_profile(const GridSpec& grid, double sigma_max_x, double sigma_max_y,
                             double width_x, double width_y, double ramp_time = 0.0);

struct Problem {
    Mode mode = Mode::OneD;
    GridSpec grid;
    RayTable rays;
    ScalarField chi;        // penalty mask (empty => unpenalized)
    ScalarField phys_mask;  // 1 on Omega_0 grid points (empty => all physical)
    PenaltyConfig pen;
    bool active = true;     // false: static penalty, g~ == 0
    ScalarBoundary g_scalar;
    VectorBoundary g_vector;
    ForcingFn forcing;
    PmlProfile pml;
    DerivProvider matching_deriv;  // optional override for g~ derivative data
    int fd_order = 0;              // 0: spectral; 2 or 4: centered-difference comparator (1D only)
    double t0 = 0.0;

    bool penalized() const { return !chi.empty(); }
    int ncomp() const { return component_count(mode); }
    bool needs_projection() const { return mode == Mode::Te || mode == Mode::Full3d; }
    void rhs(const State& u, double t, State& du) const;

    // Energy over Omega_0 grid points and over the whole box; the TE
    // observable H_z = H_zx + H_zy enters as the sum, Phi is excluded.
    void energies(const State& u, double& physical, double& total) const;
    // max |div E| over (1 - chi_h); zero for modes whose structure enforces it.
    double masked_divergence(const State& u) const;
};

// Individual systems (du must be pre-sized). These are what Problem::rhs
// dispatches to; exposed for the operator assembly and tests.
void rhs_1d(const Problem& p, const State& u, double t, State& du);
void rhs_tm(const Problem& p, const State& u, double t, State& du);
void rhs_te_pml(const Problem& p, const State& u, double t, State& du);
void rhs_tm_pml_stretched(const Problem& p, const State& u, double t, State& du);
void rhs_3d(const Problem& p, const State& u, double t, State& du);

// Requires max over the grid of chi_h * (sigma_x + sigma_y) to be exactly 0.
void validate_pml_disjoint(const GridSpec& grid, const ScalarField& chi, const PmlProfile& pml);

// Periodic centered differences (accuracy 2 or 4, derivative order 1 or 2);
// the comparator discretization for the pollution study.
ScalarField fd_derivative(const GridSpec& grid, const ScalarField& f, int axis, int accuracy, int order);

}  // namespace fpm

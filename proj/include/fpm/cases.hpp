#pragma once

// Named test-case registry with paper-default parameters, convergence and
// pollution sweep drivers, rate fitting, and CSV emission.

#include <functional>
#include <optional>
#include <string>

#include "fpm/equations.hpp"
#include "fpm/timestepping.hpp"

namespace fpm {

struct CaseOverrides {
    std::optional<int> N;
    std::optional<int> m;  // -1 selects the non-active penalty (g~ == 0, h = 0 mask)
    std::optional<double> dt_coeff, eta, h, L, T;
    std::optional<int> snapshot_stride;
};

struct CaseSetup {
    std::string id;
    Problem problem;
    State initial;
    RunConfig run;
    // Exact observable values at (node, t); empty when the case has no oracle.
    std::function<void(const Vec3&, double, std::vector<double>&)> exact;
    std::vector<int> e_observables, h_observables;  // indices into observable list
};

std::vector<std::string> list_cases();
// homogeneous replaces the boundary data with zero and drops the forcing
// (the form required by the operator assembly).
CaseSetup make_case(const std::string& id, const CaseOverrides& ov = {}, bool homogeneous = false);

// Mode observables: raw components except TE, where H_z = H_zx + H_zy.
std::vector<std::string> observable_names(Mode mode);
std::vector<ScalarField> observable_fields(Mode mode, const State& u);

struct CaseResult {
    double err_E = 0.0, err_H = 0.0;  // Linf over Omega_0 \ penalty band; NaN without oracle
    Trajectory traj;
};

// Runs the case; when out_dir is nonempty writes diagnostics.csv, the final
// field dump and any snapshots there.
CaseResult run_case(const CaseSetup& setup, const std::string& out_dir = "");

// Least-squares slope of log(error) against log(1/N), and RMS fit residual.
std::pair<double, double> fit_rate(const std::vector<double>& errors, const std::vector<int>& Ns);

struct ConvergenceReport {
    std::vector<int> Ns;
    std::vector<double> err_E, err_H;
    double rate_E = 0.0, rate_H = 0.0;
    double resid_E = 0.0, resid_H = 0.0;
    bool monotone_E = true, monotone_H = true;
};

ConvergenceReport convergence_study(const std::string& id, int m, const std::vector<int>& Ns,
                                    CaseOverrides ov = {}, const std::string& out_csv = "");

// Fixed points-per-wavelength sweep of the 1D scattering problem; the FD2 and
// FD4 rows use centered differences with the same penalty machinery and RK4.
struct PollutionRow {
    double omega0;
    int N;
    double err_spectral, err_fd2, err_fd4;
};
std::vector<PollutionRow> pollution_study(double ppwl, const std::vector<double>& omegas, int m,
                                          const std::string& out_csv = "");

// Self-convergence of the cylinder scattering case against a reference run at
// ref_N, compared on common grid points.
ConvergenceReport self_convergence_cylinder(const std::vector<int>& Ns, int ref_N,
                                            CaseOverrides ov = {});

void write_diagnostics_csv(const Trajectory& traj, const std::string& path);
void write_field_csv(const Problem& p, const State& u, double t, const std::string& path);
void write_eigs_csv(const std::vector<std::complex<double>>& eigs, const std::string& path);

}  // namespace fpm

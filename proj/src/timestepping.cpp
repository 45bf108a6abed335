#include "fpm/timestepping.hpp"

#include <cmath>
#include <stdexcept>

#include "fpm/spectral.hpp"

namespace fpm {

double max_stable_dt(int dim, double extent, int n)
{
    if (dim < 1 || dim > 3) throw std::invalid_argument("max_stable_dt: dim must be 1, 2 or 3");
    return 2.83 / (M_PI * std::sqrt(static_cast<double>(dim))) * extent / n;
}

double rk4_amplification(std::complex<double> z)
{
    const std::complex<double> r = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
    return std::norm(r);
}

namespace {

void project_electric(const Problem& p, State& u)
{
    if (p.mode == Mode::Te) {
        auto projected = project_divergence_free(p.grid, {u.c[0], u.c[1]}, p.chi);
        u.c[0] = std::move(projected[0]);
        u.c[1] = std::move(projected[1]);
    } else if (p.mode == Mode::Full3d) {
        auto projected = project_divergence_free(p.grid, {u.c[3], u.c[4], u.c[5]}, p.chi);
        u.c[3] = std::move(projected[0]);
        u.c[4] = std::move(projected[1]);
        u.c[5] = std::move(projected[2]);
    }
}

}  // namespace

Trajectory evolve(const Problem& problem, const State& initial, const RunConfig& run)
{
    const double dx = problem.grid.dx();
    double dt = run.dt > 0.0 ? run.dt : run.dt_coeff * dx;
    if (dt <= 0.0) throw std::invalid_argument("evolve: time step must be positive");
    if (run.enforce_stability && dt > max_stable_dt(problem.grid.dim, problem.grid.extent, problem.grid.n))
        throw std::invalid_argument("evolve: dt exceeds the RK4 stability bound");

    const double span = run.T - problem.t0;
    if (span <= 0.0) throw std::invalid_argument("evolve: final time must exceed t0");
    const long nsteps = static_cast<long>(std::ceil(span / dt - 1e-9));
    dt = span / nsteps;  // land exactly on T

    Trajectory traj;
    traj.state = initial;
    State k1 = State::zeros(problem.mode, problem.grid);
    State k2 = k1, k3 = k1, k4 = k1, stage = k1;

    auto record = [&](long step, double t) {
        double ph, tot;
        problem.energies(traj.state, ph, tot);
        if (!std::isfinite(tot)) throw std::runtime_error("evolve: NaN/Inf detected at step " + std::to_string(step));
        traj.diagnostics.push_back({step, t, ph, tot, problem.masked_divergence(traj.state)});
    };

    record(0, problem.t0);
    if (run.snapshot_stride > 0) traj.snapshots.emplace_back(problem.t0, traj.state);

    for (long step = 0; step < nsteps; ++step) {
        const double t = problem.t0 + step * dt;
        problem.rhs(traj.state, t, k1);
        stage.assign_axpy(traj.state, 0.5 * dt, k1);
        problem.rhs(stage, t + 0.5 * dt, k2);
        stage.assign_axpy(traj.state, 0.5 * dt, k2);
        problem.rhs(stage, t + 0.5 * dt, k3);
        stage.assign_axpy(traj.state, dt, k3);
        problem.rhs(stage, t + dt, k4);

        for (std::size_t c = 0; c < traj.state.c.size(); ++c) {
            auto& dst = traj.state.c[c];
            const auto& a = k1.c[c];
            const auto& b = k2.c[c];
            const auto& cc = k3.c[c];
            const auto& d = k4.c[c];
            const double w = dt / 6.0;
            for (std::size_t i = 0; i < dst.size(); ++i)
                dst[i] += w * (a[i] + 2.0 * b[i] + 2.0 * cc[i] + d[i]);
        }

        if (run.projection && problem.needs_projection()) project_electric(problem, traj.state);

        const double t_next = problem.t0 + (step + 1) * dt;
        record(step + 1, t_next);
        if (run.snapshot_stride > 0 &&
            ((step + 1) % run.snapshot_stride == 0 || step + 1 == nsteps))
            traj.snapshots.emplace_back(t_next, traj.state);
    }

    traj.t_final = problem.t0 + nsteps * dt;
    return traj;
}

}  // namespace fpm

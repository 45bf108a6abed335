#include "fpm/stability.hpp"

#include "fpm/timestepping.hpp"

#include <lapacke.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace fpm {

namespace {

void flatten(const State& u, Eigen::VectorXd& out)
{
    const std::size_t npts = u.c.empty() ? 0 : u.c[0].size();
    out.resize(static_cast<Eigen::Index>(u.c.size() * npts));
    for (std::size_t c = 0; c < u.c.size(); ++c)
        for (std::size_t i = 0; i < npts; ++i)
            out[static_cast<Eigen::Index>(c * npts + i)] = u.c[c][i];
}

void unflatten(const Eigen::VectorXd& in, State& u)
{
    const std::size_t npts = u.c.empty() ? 0 : u.c[0].size();
    for (std::size_t c = 0; c < u.c.size(); ++c)
        for (std::size_t i = 0; i < npts; ++i)
            u.c[c][i] = in[static_cast<Eigen::Index>(c * npts + i)];
}

}  // namespace

DenseOperator assemble_operator(const Problem& problem)
{
    const std::size_t npts = problem.grid.size();
    const int nc = problem.ncomp();
    const Eigen::Index n = static_cast<Eigen::Index>(npts) * nc;
    const double t = problem.t0;

    State u = State::zeros(problem.mode, problem.grid);
    State du = u;

    // Homogeneous-data sanity: rhs(0) == 0.
    problem.rhs(u, t, du);
    Eigen::VectorXd r0;
    flatten(du, r0);
    if (r0.lpNorm<Eigen::Infinity>() > 1e-11)
        throw std::invalid_argument("assemble_operator: rhs(0) != 0; boundary data or forcing not homogeneous");

    // Linearity spot check on random data.
    {
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        State v = State::zeros(problem.mode, problem.grid);
        for (auto& comp : v.c)
            for (auto& x : comp) x = dist(rng);
        const double alpha = 1.73;
        State dv = u, dav = u, av = v;
        problem.rhs(v, t, dv);
        for (auto& comp : av.c)
            for (auto& x : comp) x *= alpha;
        problem.rhs(av, t, dav);
        Eigen::VectorXd a, b;
        flatten(dv, a);
        flatten(dav, b);
        const double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>() * std::abs(alpha));
        if ((b - alpha * a).lpNorm<Eigen::Infinity>() > 1e-9 * scale)
            throw std::invalid_argument("assemble_operator: rhs is not linear in the state");
    }

    DenseOperator op;
    op.ncomp = nc;
    op.grid = problem.grid;
    op.A.resize(n, n);
    Eigen::VectorXd col(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const std::size_t c = static_cast<std::size_t>(j) / npts;
        const std::size_t i = static_cast<std::size_t>(j) % npts;
        u.c[c][i] = 1.0;
        problem.rhs(u, t, du);
        u.c[c][i] = 0.0;
        flatten(du, col);
        op.A.col(j) = col;
    }
    return op;
}

EigenSpectrum spectrum(const DenseOperator& op)
{
    const lapack_int n = static_cast<lapack_int>(op.A.rows());
    Eigen::MatrixXd A = op.A;  // dgeev overwrites its input
    std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
    Eigen::MatrixXd vr(n, n);

    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, A.data(), n, wr.data(),
                                          wi.data(), nullptr, 1, vr.data(), n);
    if (info != 0)
        throw std::runtime_error("spectrum: dgeev failed to converge (info = " + std::to_string(info) + ")");

    EigenSpectrum spec;
    spec.values.resize(static_cast<std::size_t>(n));
    spec.vectors.resize(n, n);
    for (lapack_int j = 0; j < n; ++j) {
        spec.values[static_cast<std::size_t>(j)] = {wr[static_cast<std::size_t>(j)], wi[static_cast<std::size_t>(j)]};
        if (wi[static_cast<std::size_t>(j)] > 0.0) {
            spec.vectors.col(j) = vr.col(j).cast<std::complex<double>>() +
                                  std::complex<double>(0, 1) * vr.col(j + 1).cast<std::complex<double>>();
        } else if (wi[static_cast<std::size_t>(j)] < 0.0) {
            spec.vectors.col(j) = vr.col(j - 1).cast<std::complex<double>>() -
                                  std::complex<double>(0, 1) * vr.col(j).cast<std::complex<double>>();
        } else {
            spec.vectors.col(j) = vr.col(j).cast<std::complex<double>>();
        }
    }

    // Validate a sample of eigenpairs against the assembled matrix.
    std::mt19937 rng(777);
    std::uniform_int_distribution<lapack_int> pick(0, n - 1);
    for (int trial = 0; trial < 10; ++trial) {
        const lapack_int j = pick(rng);
        const Eigen::VectorXcd v = spec.vectors.col(j);
        const double resid = (op.A * v - spec.values[static_cast<std::size_t>(j)] * v).norm();
        if (resid > 1e-8 * v.norm())
            throw std::runtime_error("spectrum: eigenpair residual " + std::to_string(resid) +
                                     " exceeds tolerance");
    }
    return spec;
}

ContainmentReport check_rk4_containment(const std::vector<std::complex<double>>& eigs, double dt,
                                        double slack)
{
    ContainmentReport rep;
    rep.slack = slack;
    for (const auto& lambda : eigs) {
        const double amp = rk4_amplification(lambda * dt);
        if (amp > rep.max_amplification) {
            rep.max_amplification = amp;
            rep.worst = lambda;
        }
        if (amp > 1.0 + slack) ++rep.n_outside;
    }
    return rep;
}

}  // namespace fpm

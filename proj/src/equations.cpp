#include "fpm/equations.hpp"

#include <cmath>

#include "fpm/spectral.hpp"

namespace fpm {

int component_count(Mode mode)
{
    switch (mode) {
        case Mode::OneD: return 2;
        case Mode::Tm: return 3;
        case Mode::TmPml: return 4;
        case Mode::Te: return 4;
        case Mode::Full3d: return 6;
    }
    return 0;
}

std::vector<std::string> component_names(Mode mode)
{
    switch (mode) {
        case Mode::OneD: return {"Hy", "Ez"};
        case Mode::Tm: return {"Hx", "Hy", "Ez"};
        case Mode::TmPml: return {"Hx", "Hy", "Ez", "Phi"};
        case Mode::Te: return {"Ex", "Ey", "Hzx", "Hzy"};
        case Mode::Full3d: return {"Hx", "Hy", "Hz", "Ex", "Ey", "Ez"};
    }
    return {};
}

State State::zeros(Mode mode, const GridSpec& grid)
{
    State u;
    u.c.assign(static_cast<std::size_t>(component_count(mode)), grid.make_field());
    return u;
}

void State::axpy(double a, const State& other)
{
    for (std::size_t k = 0; k < c.size(); ++k) {
        const auto& src = other.c[k];
        auto& dst = c[k];
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    }
}

void State::assign_axpy(const State& base, double a, const State& k)
{
    if (c.size() != base.c.size()) c = base.c;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto& b = base.c[j];
        const auto& kk = k.c[j];
        auto& dst = c[j];
        dst.resize(b.size());
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = b[i] + a * kk[i];
    }
}

double PmlProfile::ramp(double t) const
{
    if (ramp_time <= 0.0) return 1.0;
    if (t <= 0.0) return 0.0;
    if (t >= ramp_time) return 1.0;
    const double r = t / ramp_time;
    return r * r * r;
}

PmlProfile build_pml_profile(const GridSpec& grid, double sigma_max_x, double sigma_max_y,
                             double width_x, double width_y, double ramp_time)
{
    PmlProfile pml;
    pml.ramp_time = ramp_time;
    auto build_axis = [&grid](int axis, double sigma_max, double width) {
        if (sigma_max <= 0.0) return ScalarField{};
        if (width <= 0.0 || width >= grid.extent)
            throw std::invalid_argument("build_pml_profile: slab width must lie inside the box");
        ScalarField sig = grid.make_field();
        const double seam = grid.origin[static_cast<std::size_t>(axis)] + grid.extent;
        const double inner = seam - width;
        for (std::size_t i = 0; i < sig.size(); ++i) {
            const auto idx = grid.unflatten(i);
            const double ca = grid.coord(axis, idx[static_cast<std::size_t>(axis)]);
            if (ca >= inner) sig[i] = sigma_max * (ca - inner) / width;
        }
        return sig;
    };
    pml.sigma_x = build_axis(0, sigma_max_x, width_x);
    if (grid.dim >= 2) pml.sigma_y = build_axis(1, sigma_max_y, width_y);
    return pml;
}

void validate_pml_disjoint(const GridSpec& grid, const ScalarField& chi, const PmlProfile& pml)
{
    if (chi.empty() || !pml.any()) return;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        if (!pml.sigma_x.empty()) s += pml.sigma_x[i];
        if (!pml.sigma_y.empty()) s += pml.sigma_y[i];
        worst = std::max(worst, chi[i] * s);
    }
    if (worst != 0.0)
        throw std::invalid_argument("penalty band and PML slabs overlap (max chi*(sigma_x+sigma_y) = " +
                                    std::to_string(worst) + ")");
}

ScalarField fd_derivative(const GridSpec& grid, const ScalarField& f, int axis, int accuracy, int order)
{
    if (grid.dim != 1 || axis != 0)
        throw std::invalid_argument("fd_derivative: comparator stencils are 1D only");
    if (f.size() != grid.size()) throw std::invalid_argument("fd_derivative: size mismatch");
    const int n = grid.n;
    const double dx = grid.dx();
    ScalarField out(f.size());
    auto at = [&](int j) { return f[static_cast<std::size_t>(((j % n) + n) % n)]; };
    for (int j = 0; j < n; ++j) {
        double v;
        if (order == 1) {
            if (accuracy == 2)
                v = (at(j + 1) - at(j - 1)) / (2.0 * dx);
            else
                v = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * dx);
        } else {
            if (accuracy == 2)
                v = (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (dx * dx);
            else
                v = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) - at(j - 2)) /
                    (12.0 * dx * dx);
        }
        out[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

namespace {

// Derivative used for the wave operator itself: spectral, or the centered
// comparator stencil when fd_order is set (1D pollution study).
ScalarField wave_deriv(const Problem& p, const ScalarField& f, int axis)
{
    if (p.fd_order > 0) return fd_derivative(p.grid, f, axis, p.fd_order, 1);
    return spectral_derivative(p.grid, f, axis, 1);
}

DerivProvider matching_provider(const Problem& p)
{
    if (p.matching_deriv) return p.matching_deriv;
    return spectral_deriv_provider(p.pen.c_f);
}

// du_E -= chi/eta * (E - gtilde)
void apply_penalty(const Problem& p, const ScalarField& E, const ScalarField& gtilde, ScalarField& duE)
{
    const double inv_eta = 1.0 / p.pen.eta;
    if (gtilde.empty()) {
        for (std::size_t i = 0; i < duE.size(); ++i)
            duE[i] -= inv_eta * p.chi[i] * E[i];
        return;
    }
    for (std::size_t i = 0; i < duE.size(); ++i)
        duE[i] -= inv_eta * p.chi[i] * (E[i] - gtilde[i]);
}

ScalarField zero_field;  // sentinel for the non-active penalty

inline const ScalarField& sigma_or_empty(const ScalarField& s) { return s; }

void add_forcing(const Problem& p, double t, ScalarField& du, double weight)
{
    if (!p.forcing) return;
    for (std::size_t i = 0; i < du.size(); ++i) {
        const auto node = p.grid.node(i);
        du[i] += weight * p.forcing(Vec3(node[0], node[1], node[2]), t);
    }
}

}  // namespace

void rhs_1d(const Problem& p, const State& u, double t, State& du)
{
    const ScalarField& Hy = u.c[0];
    const ScalarField& Ez = u.c[1];
    du.c[0] = wave_deriv(p, Ez, 0);
    du.c[1] = wave_deriv(p, Hy, 0);
    if (p.penalized()) {
        ScalarField gt;
        if (p.active) gt = build_gtilde_1d(p.grid, p.rays, p.pen, Ez, p.g_scalar, t, matching_provider(p));
        apply_penalty(p, Ez, gt, du.c[1]);
    }
}

void rhs_tm(const Problem& p, const State& u, double t, State& du)
{
    const ScalarField& Hx = u.c[0];
    const ScalarField& Hy = u.c[1];
    const ScalarField& Ez = u.c[2];
    ScalarField dEz_dy = spectral_derivative(p.grid, Ez, 1, 1);
    for (auto& v : dEz_dy) v = -v;
    du.c[0] = std::move(dEz_dy);
    du.c[1] = spectral_derivative(p.grid, Ez, 0, 1);
    du.c[2] = spectral_derivative(p.grid, Hy, 0, 1);
    const ScalarField dHx_dy = spectral_derivative(p.grid, Hx, 1, 1);
    for (std::size_t i = 0; i < du.c[2].size(); ++i) du.c[2][i] -= dHx_dy[i];
    if (p.penalized()) {
        ScalarField gt;
        if (p.active) gt = build_gtilde_tm(p.grid, p.rays, p.pen, Ez, p.g_scalar, t, matching_provider(p));
        apply_penalty(p, Ez, gt, du.c[2]);
    }
    add_forcing(p, t, du.c[2], 1.0);
}

void rhs_te_pml(const Problem& p, const State& u, double t, State& du)
{
    const ScalarField& Ex = u.c[0];
    const ScalarField& Ey = u.c[1];
    const ScalarField& Hzx = u.c[2];
    const ScalarField& Hzy = u.c[3];

    ScalarField Hz(Hzx.size());
    for (std::size_t i = 0; i < Hz.size(); ++i) Hz[i] = Hzx[i] + Hzy[i];

    du.c[0] = spectral_derivative(p.grid, Hz, 1, 1);
    du.c[1] = spectral_derivative(p.grid, Hz, 0, 1);
    for (auto& v : du.c[1]) v = -v;
    du.c[2] = spectral_derivative(p.grid, Ey, 0, 1);
    for (auto& v : du.c[2]) v = -v;
    du.c[3] = spectral_derivative(p.grid, Ex, 1, 1);

    if (p.pml.any()) {
        const double ramp = p.pml.ramp(t);
        if (!p.pml.sigma_y.empty()) {
            for (std::size_t i = 0; i < Hz.size(); ++i) {
                const double sy = ramp * p.pml.sigma_y[i];
                du.c[0][i] -= sy * Ex[i];
                du.c[3][i] -= sy * Hzy[i];
            }
        }
        if (!p.pml.sigma_x.empty()) {
            for (std::size_t i = 0; i < Hz.size(); ++i) {
                const double sx = ramp * p.pml.sigma_x[i];
                du.c[1][i] -= sx * Ey[i];
                du.c[2][i] -= sx * Hzx[i];
            }
        }
    }

    if (p.penalized()) {
        std::vector<ScalarField> gt;
        if (p.active) gt = build_gtilde_vector(p.grid, p.rays, p.pen, {Ex, Ey}, p.g_vector, t);
        apply_penalty(p, Ex, p.active ? gt[0] : zero_field, du.c[0]);
        apply_penalty(p, Ey, p.active ? gt[1] : zero_field, du.c[1]);
    }
    // Manufactured forcing acts on the observable H_z; split evenly.
    add_forcing(p, t, du.c[2], 0.5);
    add_forcing(p, t, du.c[3], 0.5);
}

void rhs_tm_pml_stretched(const Problem& p, const State& u, double t, State& du)
{
    const ScalarField& Hx = u.c[0];
    const ScalarField& Hy = u.c[1];
    const ScalarField& Ez = u.c[2];
    const ScalarField& Phi = u.c[3];

    du.c[0] = spectral_derivative(p.grid, Ez, 1, 1);
    for (auto& v : du.c[0]) v = -v;
    du.c[1] = spectral_derivative(p.grid, Ez, 0, 1);
    du.c[2] = spectral_derivative(p.grid, Hy, 0, 1);
    const ScalarField dHx_dy = spectral_derivative(p.grid, Hx, 1, 1);
    for (std::size_t i = 0; i < du.c[2].size(); ++i) du.c[2][i] -= dHx_dy[i];
    du.c[3].assign(Ez.size(), 0.0);

    if (p.pml.any()) {
        const double ramp = p.pml.ramp(t);
        for (std::size_t i = 0; i < Ez.size(); ++i) {
            const double sx = p.pml.sigma_x.empty() ? 0.0 : ramp * p.pml.sigma_x[i];
            const double sy = p.pml.sigma_y.empty() ? 0.0 : ramp * p.pml.sigma_y[i];
            du.c[0][i] -= sy * Hx[i];
            du.c[1][i] -= sx * Hy[i];
            du.c[2][i] += -(sx + sy) * Ez[i] + Phi[i];
            du.c[3][i] = -sx * sy * Ez[i];
        }
    } else {
        for (std::size_t i = 0; i < Ez.size(); ++i) du.c[2][i] += Phi[i];
    }

    if (p.penalized()) {
        ScalarField gt;
        if (p.active) gt = build_gtilde_tm(p.grid, p.rays, p.pen, Ez, p.g_scalar, t, matching_provider(p));
        apply_penalty(p, Ez, gt, du.c[2]);
    }
}

void rhs_3d(const Problem& p, const State& u, double t, State& du)
{
    const ScalarField& Hx = u.c[0];
    const ScalarField& Hy = u.c[1];
    const ScalarField& Hz = u.c[2];
    const ScalarField& Ex = u.c[3];
    const ScalarField& Ey = u.c[4];
    const ScalarField& Ez = u.c[5];

    auto d = [&](const ScalarField& f, int axis) { return spectral_derivative(p.grid, f, axis, 1); };
    auto minus = [](ScalarField a, const ScalarField& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    };

    du.c[0] = minus(d(Ey, 2), d(Ez, 1));
    du.c[1] = minus(d(Ez, 0), d(Ex, 2));
    du.c[2] = minus(d(Ex, 1), d(Ey, 0));
    du.c[3] = minus(d(Hz, 1), d(Hy, 2));
    du.c[4] = minus(d(Hx, 2), d(Hz, 0));
    du.c[5] = minus(d(Hy, 0), d(Hx, 1));

    if (p.penalized()) {
        std::vector<ScalarField> gt;
        if (p.active) gt = build_gtilde_vector(p.grid, p.rays, p.pen, {Ex, Ey, Ez}, p.g_vector, t);
        apply_penalty(p, Ex, p.active ? gt[0] : zero_field, du.c[3]);
        apply_penalty(p, Ey, p.active ? gt[1] : zero_field, du.c[4]);
        apply_penalty(p, Ez, p.active ? gt[2] : zero_field, du.c[5]);
    }
}

void Problem::rhs(const State& u, double t, State& du) const
{
    if (du.c.size() != u.c.size()) du.c.assign(u.c.size(), grid.make_field());
    switch (mode) {
        case Mode::OneD: rhs_1d(*this, u, t, du); break;
        case Mode::Tm: rhs_tm(*this, u, t, du); break;
        case Mode::TmPml: rhs_tm_pml_stretched(*this, u, t, du); break;
        case Mode::Te: rhs_te_pml(*this, u, t, du); break;
        case Mode::Full3d: rhs_3d(*this, u, t, du); break;
    }
}

void Problem::energies(const State& u, double& physical, double& total) const
{
    double phys = 0.0, tot = 0.0;
    const std::size_t npts = grid.size();
    const bool have_mask = !phys_mask.empty();
    for (std::size_t i = 0; i < npts; ++i) {
        double q = 0.0;
        if (mode == Mode::Te) {
            const double hz = u.c[2][i] + u.c[3][i];
            q = u.c[0][i] * u.c[0][i] + u.c[1][i] * u.c[1][i] + hz * hz;
        } else {
            const std::size_t nc = (mode == Mode::TmPml) ? 3 : u.c.size();
            for (std::size_t k = 0; k < nc; ++k) q += u.c[k][i] * u.c[k][i];
        }
        tot += q;
        if (!have_mask || phys_mask[i] != 0.0) phys += q;
    }
    double cell = 1.0;
    for (int d = 0; d < grid.dim; ++d) cell *= grid.dx();
    physical = 0.5 * phys * cell;
    total = 0.5 * tot * cell;
}

double Problem::masked_divergence(const State& u) const
{
    std::vector<ScalarField> E;
    if (mode == Mode::Te)
        E = {u.c[0], u.c[1]};
    else if (mode == Mode::Full3d)
        E = {u.c[3], u.c[4], u.c[5]};
    else
        return 0.0;
    const ScalarField div = divergence(grid, E);
    double worst = 0.0;
    for (std::size_t i = 0; i < div.size(); ++i) {
        const double w = chi.empty() ? 1.0 : 1.0 - chi[i];
        worst = std::max(worst, std::abs(div[i]) * w);
    }
    return worst;
}

}  // namespace fpm

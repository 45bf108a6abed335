#include "fpm/cases.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "fpm/oracles.hpp"

namespace fpm {

namespace {

double pulse_deriv(double x, double x0, double sigma)
{
    const double r = (x - x0) / sigma;
    return 2.0 / (sigma * sigma) * (x - x0) * std::exp(-r * r);
}

void finish_masks(CaseSetup& s, const LevelSetGeometry& geom, double mask_h)
{
    s.problem.chi = mask_chi_h(geom, s.problem.grid, mask_h);
    s.problem.phys_mask = physical_mask(geom, s.problem.grid);
    if (s.problem.active) s.problem.rays = build_ray_table(geom, s.problem.grid, s.problem.pen.h, s.problem.pen.L);
}

struct CaseParams {
    int N, m;
    bool active;
    double dt_coeff, T;
};

CaseParams base_params(const CaseOverrides& ov, int N_def, int m_def, double dt_def, double T_def)
{
    CaseParams p;
    p.N = ov.N.value_or(N_def);
    const int m = ov.m.value_or(m_def);
    p.active = m >= 0;
    p.m = std::max(m, 0);
    p.dt_coeff = ov.dt_coeff.value_or(dt_def);
    p.T = ov.T.value_or(T_def);
    return p;
}

// ---- individual cases ------------------------------------------------------

CaseSetup case_gauss1d(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 1024, 0, 0.2, 12.0);
    CaseSetup s;
    s.id = "gauss1d";
    s.problem.mode = Mode::OneD;
    s.problem.grid = GridSpec(1, cp.N, 16.0, {-2.0, 0.0, 0.0});
    const double dx = s.problem.grid.dx();

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(dx);
    s.problem.pen.h = ov.h.value_or(dx);
    s.problem.pen.L = ov.L.value_or(1.0);
    s.problem.g_scalar = [](const Vec3&, double) { return 0.0; };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_halfspace(0.0, s.problem.grid);
    finish_masks(s, geom, cp.active ? s.problem.pen.h : 0.0);

    const PulseParams pulse;
    s.initial = State::zeros(Mode::OneD, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const double x = s.problem.grid.coord(0, static_cast<int>(i));
        gaussian_1d_exact(x, 0.0, pulse, s.initial.c[0][i], s.initial.c[1][i]);
    }
    s.exact = [pulse](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(2);
        gaussian_1d_exact(x[0], t, pulse, out[0], out[1]);
    };
    s.h_observables = {0};
    s.e_observables = {1};
    return s;
}

CaseSetup make_pollution_case(double omega0, double ppwl, int m, int fd_order, const CaseOverrides& ov)
{
    const double D = 16.0;
    int N = static_cast<int>(std::ceil(ppwl * D * omega0 / (2.0 * M_PI)));
    if (N % 2 != 0) ++N;
    CaseOverrides o = ov;
    if (!o.N) o.N = N;
    if (!o.dt_coeff) o.dt_coeff = (m == 2) ? 0.2 : 0.5;
    CaseSetup s;
    {
        const CaseParams cp = base_params(o, N, m, 0.5, 15.0);
        s.id = "pollution1d";
        s.problem.mode = Mode::OneD;
        s.problem.grid = GridSpec(1, cp.N, D, {-2.0, 0.0, 0.0});
        const double dx = s.problem.grid.dx();
        const double dt = cp.dt_coeff * dx;
        s.problem.active = cp.active;
        s.problem.pen.m = cp.m;
        s.problem.pen.eta = o.eta.value_or(dt);
        s.problem.pen.h = o.h.value_or(1.002 * dx);
        s.problem.pen.L = o.L.value_or(1.0);
        s.problem.fd_order = fd_order;
        if (fd_order > 0)
            s.problem.matching_deriv = [fd_order](const GridSpec& g, const ScalarField& f, int axis,
                                                  int order) { return fd_derivative(g, f, axis, fd_order, order); };
        s.problem.g_scalar = [](const Vec3&, double) { return 0.0; };
        s.run.dt_coeff = cp.dt_coeff;
        s.run.T = cp.T;

        const LevelSetGeometry geom = make_halfspace(0.0, s.problem.grid);
        finish_masks(s, geom, cp.active ? s.problem.pen.h : 0.0);

        PulseParams pulse;
        pulse.omega0 = omega0;
        s.initial = State::zeros(Mode::OneD, s.problem.grid);
        for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
            const double x = s.problem.grid.coord(0, static_cast<int>(i));
            gaussian_1d_exact(x, 0.0, pulse, s.initial.c[0][i], s.initial.c[1][i]);
        }
        s.exact = [pulse](const Vec3& x, double t, std::vector<double>& out) {
            out.resize(2);
            gaussian_1d_exact(x[0], t, pulse, out[0], out[1]);
        };
        s.h_observables = {0};
        s.e_observables = {1};
    }
    return s;
}

CaseSetup case_tm_circle(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 64, 0, 0.4, 1.1 * M_PI);
    CaseSetup s;
    s.id = "tm_circle";
    s.problem.mode = Mode::Tm;
    s.problem.grid = GridSpec(2, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(4.0 * dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(1.0);
    s.problem.g_scalar = [](const Vec3& y, double t) { return std::sin(y[0]) * std::cos(y[1]) * std::cos(t); };
    s.problem.forcing = [](const Vec3& x, double t) { return manufactured_forcing(x[0], x[1], t); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_circle_hole(M_PI, M_PI, 2.0);
    finish_masks(s, geom, s.problem.pen.h);

    s.initial = State::zeros(Mode::Tm, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        manufactured_tm_exact(p[0], p[1], 0.0, s.initial.c[0][i], s.initial.c[1][i], s.initial.c[2][i]);
    }
    s.exact = [](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(3);
        manufactured_tm_exact(x[0], x[1], t, out[0], out[1], out[2]);
    };
    s.h_observables = {0, 1};
    s.e_observables = {2};
    return s;
}

CaseSetup case_te_circle(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 64, 0, 0.4, 1.1 * M_PI);
    CaseSetup s;
    s.id = "te_circle";
    s.problem.mode = Mode::Te;
    s.problem.grid = GridSpec(2, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(4.0 * dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(1.0);
    s.problem.g_vector = [](const Vec3& y, double t) {
        double ex, ey, hz;
        manufactured_te_exact(y[0], y[1], t, ex, ey, hz);
        return Vec3(ex, ey, 0.0);
    };
    s.problem.forcing = [](const Vec3& x, double t) { return manufactured_forcing(x[0], x[1], t); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_circle_hole(M_PI, M_PI, 2.0);
    finish_masks(s, geom, s.problem.pen.h);

    s.initial = State::zeros(Mode::Te, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        double ex, ey, hz;
        manufactured_te_exact(p[0], p[1], 0.0, ex, ey, hz);
        s.initial.c[0][i] = ex;
        s.initial.c[1][i] = ey;
        s.initial.c[2][i] = hz;  // H_zx carries the initial field, H_zy = 0
    }
    s.exact = [](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(3);
        manufactured_te_exact(x[0], x[1], t, out[0], out[1], out[2]);
    };
    s.e_observables = {0, 1};
    s.h_observables = {2};
    return s;
}

CaseSetup case_cavity(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 64, 1, 0.4, 0.3);
    CaseSetup s;
    s.id = "cavity";
    s.problem.mode = Mode::Tm;
    s.problem.grid = GridSpec(2, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(4.0 * dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.45);
    s.problem.g_scalar = [](const Vec3&, double) { return 0.0; };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_circular_cavity(M_PI, M_PI, 1.0);
    finish_masks(s, geom, s.problem.pen.h);

    const int order = 6;
    const double alpha = bessel_j_root(order, 2);  // ~13.5892
    s.initial = State::zeros(Mode::Tm, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        const double rho = std::hypot(p[0] - M_PI, p[1] - M_PI);
        const double phi = std::atan2(p[1] - M_PI, p[0] - M_PI);
        s.initial.c[2][i] = bessel_j(order, alpha * rho) * std::cos(order * phi);
    }
    s.exact = [order, alpha](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(3);
        const double rho = std::hypot(x[0] - M_PI, x[1] - M_PI);
        const double phi = std::atan2(x[1] - M_PI, x[0] - M_PI);
        const CavityFields f = cavity_mode_exact(order, alpha, rho, phi, t);
        out[0] = f.H_x;
        out[1] = f.H_y;
        out[2] = f.E_z;
    };
    s.h_observables = {0, 1};
    s.e_observables = {2};
    return s;
}

CaseSetup case_cylinder_scatter(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 128, 0, 0.4, 1.5080);
    CaseSetup s;
    s.id = "cylinder_scatter";
    s.problem.mode = Mode::Te;
    s.problem.grid = GridSpec(2, cp.N, 2.5, {-1.0, -1.0, 0.0});
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.15);
    s.problem.g_vector = [](const Vec3&, double) { return Vec3(0.0, 0.0, 0.0); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const double sigma_max = s.problem.grid.extent / (2.0 * dx);
    s.problem.pml = build_pml_profile(s.problem.grid, sigma_max, sigma_max, 0.25, 0.25);

    const LevelSetGeometry geom = make_circle_hole(0.0, 0.0, 0.2);
    finish_masks(s, geom, s.problem.pen.h);
    validate_pml_disjoint(s.problem.grid, s.problem.chi, s.problem.pml);

    const double sig = 0.125, x0 = -0.6;
    s.initial = State::zeros(Mode::Te, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        const double v = pulse_deriv(p[0], x0, sig);
        s.initial.c[1][i] = v;
        s.initial.c[2][i] = v;
    }
    s.e_observables = {0, 1};
    s.h_observables = {2};
    return s;
}

CaseSetup case_waveguide_tm(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 64, 0, 0.4, 0.275 * M_PI);
    CaseSetup s;
    s.id = "waveguide_tm";
    s.problem.mode = Mode::Tm;
    s.problem.grid = GridSpec(2, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.4);
    s.problem.g_scalar = [](const Vec3& y, double t) { return std::sin(y[0]) * std::cos(y[1]) * std::cos(t); };
    s.problem.forcing = [](const Vec3& x, double t) { return manufactured_forcing(x[0], x[1], t); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = build_waveguide(1.0, M_PI - 2.0, 2.0, 0.5, s.problem.grid);
    finish_masks(s, geom, s.problem.pen.h);

    s.initial = State::zeros(Mode::Tm, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        manufactured_tm_exact(p[0], p[1], 0.0, s.initial.c[0][i], s.initial.c[1][i], s.initial.c[2][i]);
    }
    s.exact = [](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(3);
        manufactured_tm_exact(x[0], x[1], t, out[0], out[1], out[2]);
    };
    s.h_observables = {0, 1};
    s.e_observables = {2};
    return s;
}

CaseSetup case_waveguide_te_pulse(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 128, 0, 0.4, 10.0);
    CaseSetup s;
    s.id = "waveguide_te_pulse";
    s.problem.mode = Mode::Te;
    s.problem.grid = GridSpec(2, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.4);
    s.problem.g_vector = [](const Vec3&, double) { return Vec3(0.0, 0.0, 0.0); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    // The guide crosses the absorbing strip at the periodic seam, so the
    // penalty band and the PML deliberately coexist here; the split-field
    // equations keep both terms well-defined.
    const double sigma_max = s.problem.grid.extent / (2.0 * dx);
    s.problem.pml = build_pml_profile(s.problem.grid, sigma_max, 0.0, 0.25, 0.0);

    const LevelSetGeometry geom = build_waveguide(1.0, M_PI - 2.0, 2.0, 0.5, s.problem.grid);
    finish_masks(s, geom, s.problem.pen.h);

    const double sig = 0.25, x0 = 0.5;
    s.initial = State::zeros(Mode::Te, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        const double v = -pulse_deriv(p[0], x0, sig);
        s.initial.c[1][i] = v;
        s.initial.c[2][i] = v;
    }
    s.e_observables = {0, 1};
    s.h_observables = {2};
    return s;
}

CaseSetup case_windmill_tm_pml(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 128, 1, 0.4, 10.0);
    CaseSetup s;
    s.id = "windmill_tm_pml";
    s.problem.mode = Mode::TmPml;
    s.problem.grid = GridSpec(2, cp.N, 3.0 * M_PI, {-1.5 * M_PI, -1.5 * M_PI, 0.0});
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.3);
    s.problem.g_scalar = [](const Vec3&, double) { return 0.0; };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const double sigma_max = cp.N / 2.0;
    s.problem.pml = build_pml_profile(s.problem.grid, sigma_max, sigma_max, 1.0 / 3.0, 1.0 / 3.0,
                                      0.5 * cp.T);

    const LevelSetGeometry geom = make_trifolium(3.0, 1.0);
    finish_masks(s, geom, s.problem.pen.h);
    validate_pml_disjoint(s.problem.grid, s.problem.chi, s.problem.pml);

    const double sig = 0.25, x0 = -4.0;
    s.initial = State::zeros(Mode::TmPml, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        const double v = pulse_deriv(p[0], x0, sig);
        s.initial.c[1][i] = -v;
        s.initial.c[2][i] = v;
    }
    s.h_observables = {0, 1};
    s.e_observables = {2};
    return s;
}

CaseSetup case_sphere3d(const CaseOverrides& ov)
{
    const double t0 = M_PI / (2.0 * std::sqrt(3.0));
    const CaseParams cp = base_params(ov, 32, 0, 0.4, t0 + 3.0);
    CaseSetup s;
    s.id = "sphere3d";
    s.problem.mode = Mode::Full3d;
    s.problem.grid = GridSpec(3, cp.N, 2.0 * M_PI);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(4.0 * dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(1.0);
    s.problem.t0 = t0;
    s.problem.g_vector = [](const Vec3& y, double t) {
        Vec3 E, H;
        standing_wave_3d_exact(y, t, E, H);
        return E;
    };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_sphere_hole(M_PI, M_PI, M_PI, 2.0);
    finish_masks(s, geom, s.problem.pen.h);

    s.initial = State::zeros(Mode::Full3d, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        Vec3 E, H;
        standing_wave_3d_exact(Vec3(p[0], p[1], p[2]), t0, E, H);
        for (int c = 0; c < 3; ++c) {
            s.initial.c[static_cast<std::size_t>(c)][i] = H[c];
            s.initial.c[static_cast<std::size_t>(c + 3)][i] = E[c];
        }
    }
    s.exact = [](const Vec3& x, double t, std::vector<double>& out) {
        out.resize(6);
        Vec3 E, H;
        standing_wave_3d_exact(x, t, E, H);
        for (int c = 0; c < 3; ++c) {
            out[static_cast<std::size_t>(c)] = H[c];
            out[static_cast<std::size_t>(c + 3)] = E[c];
        }
    };
    s.h_observables = {0, 1, 2};
    s.e_observables = {3, 4, 5};
    return s;
}

CaseSetup case_gyroid_demo(const CaseOverrides& ov)
{
    const CaseParams cp = base_params(ov, 64, 0, 0.35, 1.0);
    CaseSetup s;
    s.id = "gyroid_demo";
    s.problem.mode = Mode::Full3d;
    s.problem.grid = GridSpec(3, cp.N, 1.0);
    const double dx = s.problem.grid.dx();
    const double dt = cp.dt_coeff * dx;

    s.problem.active = cp.active;
    s.problem.pen.m = cp.m;
    s.problem.pen.eta = ov.eta.value_or(5.0 * dt);
    s.problem.pen.h = ov.h.value_or(2.0 * dx);
    s.problem.pen.L = ov.L.value_or(0.025);
    s.problem.g_vector = [](const Vec3&, double) { return Vec3(0.0, 0.0, 0.0); };
    s.run.dt_coeff = cp.dt_coeff;
    s.run.T = cp.T;

    const LevelSetGeometry geom = make_gyroid(0.95);
    finish_masks(s, geom, s.problem.pen.h);

    const double sig = 0.05, x0 = 0.5;
    s.initial = State::zeros(Mode::Full3d, s.problem.grid);
    for (std::size_t i = 0; i < s.problem.grid.size(); ++i) {
        const auto p = s.problem.grid.node(i);
        const double v = pulse_deriv(p[0], x0, sig);
        s.initial.c[1][i] = -v;  // H_y
        s.initial.c[5][i] = v;   // E_z, pulse traveling in +x
    }
    s.h_observables = {0, 1, 2};
    s.e_observables = {3, 4, 5};
    return s;
}

using CaseBuilder = CaseSetup (*)(const CaseOverrides&);

const std::map<std::string, CaseBuilder>& registry()
{
    static const std::map<std::string, CaseBuilder> reg = {
        {"gauss1d", case_gauss1d},
        {"pollution1d", [](const CaseOverrides& ov) { return make_pollution_case(10.0, 20.0, ov.m.value_or(1), 0, ov); }},
        {"tm_circle", case_tm_circle},
        {"te_circle", case_te_circle},
        {"cavity", case_cavity},
        {"cylinder_scatter", case_cylinder_scatter},
        {"waveguide_tm", case_waveguide_tm},
        {"waveguide_te_pulse", case_waveguide_te_pulse},
        {"windmill_tm_pml", case_windmill_tm_pml},
        {"sphere3d", case_sphere3d},
        {"gyroid_demo", case_gyroid_demo},
    };
    return reg;
}

}  // namespace

std::vector<std::string> list_cases()
{
    std::vector<std::string> ids;
    for (const auto& [id, fn] : registry()) ids.push_back(id);
    return ids;
}

CaseSetup make_case(const std::string& id, const CaseOverrides& ov, bool homogeneous)
{
    const auto it = registry().find(id);
    if (it == registry().end()) throw std::invalid_argument("unknown case id: " + id);
    CaseSetup s = it->second(ov);
    if (ov.snapshot_stride) s.run.snapshot_stride = *ov.snapshot_stride;
    if (homogeneous) {
        s.problem.g_scalar = [](const Vec3&, double) { return 0.0; };
        s.problem.g_vector = [](const Vec3&, double) { return Vec3(0.0, 0.0, 0.0); };
        s.problem.forcing = nullptr;
    }
    return s;
}

std::vector<std::string> observable_names(Mode mode)
{
    if (mode == Mode::Te) return {"Ex", "Ey", "Hz"};
    return component_names(mode);
}

std::vector<ScalarField> observable_fields(Mode mode, const State& u)
{
    if (mode == Mode::Te) {
        ScalarField hz(u.c[2].size());
        for (std::size_t i = 0; i < hz.size(); ++i) hz[i] = u.c[2][i] + u.c[3][i];
        return {u.c[0], u.c[1], hz};
    }
    return u.c;
}

CaseResult run_case(const CaseSetup& setup, const std::string& out_dir)
{
    CaseResult result;
    result.traj = evolve(setup.problem, setup.initial, setup.run);

    if (setup.exact) {
        const auto obs = observable_fields(setup.problem.mode, result.traj.state);
        const auto& grid = setup.problem.grid;
        std::vector<double> ex;
        double errE = 0.0, errH = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!setup.problem.chi.empty() && setup.problem.chi[i] != 0.0) continue;
            if (!setup.problem.phys_mask.empty() && setup.problem.phys_mask[i] == 0.0) continue;
            const auto p = grid.node(i);
            setup.exact(Vec3(p[0], p[1], p[2]), result.traj.t_final, ex);
            for (int k : setup.e_observables)
                errE = std::max(errE, std::abs(obs[static_cast<std::size_t>(k)][i] - ex[static_cast<std::size_t>(k)]));
            for (int k : setup.h_observables)
                errH = std::max(errH, std::abs(obs[static_cast<std::size_t>(k)][i] - ex[static_cast<std::size_t>(k)]));
        }
        result.err_E = errE;
        result.err_H = errH;
    } else {
        result.err_E = result.err_H = std::nan("");
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_diagnostics_csv(result.traj, out_dir + "/diagnostics.csv");
        std::ostringstream name;
        name << out_dir << "/field_" << std::setprecision(6) << result.traj.t_final << ".csv";
        write_field_csv(setup.problem, result.traj.state, result.traj.t_final, name.str());
        for (const auto& [t, snap] : result.traj.snapshots) {
            std::ostringstream sn;
            sn << out_dir << "/field_" << std::setprecision(6) << t << ".csv";
            write_field_csv(setup.problem, snap, t, sn.str());
        }
    }
    return result;
}

std::pair<double, double> fit_rate(const std::vector<double>& errors, const std::vector<int>& Ns)
{
    if (errors.size() != Ns.size() || errors.size() < 2)
        throw std::invalid_argument("fit_rate: need matching error/N lists with >= 2 entries");
    const std::size_t n = errors.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i] <= 0.0) throw std::invalid_argument("fit_rate: errors must be positive");
        xs[i] = -std::log(static_cast<double>(Ns[i]));  // log(1/N)
        ys[i] = std::log(errors[i]);
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = num / den;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = my + slope * (xs[i] - mx);
        rss += (ys[i] - fit) * (ys[i] - fit);
    }
    return {slope, std::sqrt(rss / n)};
}

namespace {

void write_errors_csv(const ConvergenceReport& rep, const std::string& path)
{
    std::ofstream f(path);
    f << "N,Linf_E,Linf_H,rate_E,rate_H\n";
    f << std::setprecision(12);
    for (std::size_t i = 0; i < rep.Ns.size(); ++i) {
        f << rep.Ns[i] << ',' << rep.err_E[i] << ',' << rep.err_H[i] << ',';
        if (i > 0) {
            const double dlogN = std::log(static_cast<double>(rep.Ns[i]) / rep.Ns[i - 1]);
            f << std::log(rep.err_E[i - 1] / rep.err_E[i]) / dlogN << ','
              << std::log(rep.err_H[i - 1] / rep.err_H[i]) / dlogN;
        } else {
            f << ',';
        }
        f << '\n';
    }
}

}  // namespace

ConvergenceReport convergence_study(const std::string& id, int m, const std::vector<int>& Ns,
                                    CaseOverrides ov, const std::string& out_csv)
{
    if (Ns.size() < 3) throw std::invalid_argument("convergence_study: need at least 3 grid sizes");
    ConvergenceReport rep;
    rep.Ns = Ns;
    ov.m = m;
    for (int N : Ns) {
        CaseOverrides o = ov;
        o.N = N;
        const CaseResult r = run_case(make_case(id, o));
        rep.err_E.push_back(r.err_E);
        rep.err_H.push_back(r.err_H);
    }
    std::tie(rep.rate_E, rep.resid_E) = fit_rate(rep.err_E, Ns);
    std::tie(rep.rate_H, rep.resid_H) = fit_rate(rep.err_H, Ns);
    for (std::size_t i = 1; i < rep.err_E.size(); ++i) {
        if (rep.err_E[i] > rep.err_E[i - 1]) rep.monotone_E = false;
        if (rep.err_H[i] > rep.err_H[i - 1]) rep.monotone_H = false;
    }
    if (!out_csv.empty()) write_errors_csv(rep, out_csv);
    return rep;
}

std::vector<PollutionRow> pollution_study(double ppwl, const std::vector<double>& omegas, int m,
                                          const std::string& out_csv)
{
    if (ppwl < 8.0) throw std::invalid_argument("pollution_study: ppwl must be >= 8");
    std::vector<PollutionRow> rows;
    for (double w0 : omegas) {
        PollutionRow row{};
        row.omega0 = w0;
        for (int fd : {0, 2, 4}) {
            const CaseSetup s = make_pollution_case(w0, ppwl, m, fd, {});
            row.N = s.problem.grid.n;
            const CaseResult r = run_case(s);
            const double err = std::max(r.err_E, r.err_H);
            if (fd == 0)
                row.err_spectral = err;
            else if (fd == 2)
                row.err_fd2 = err;
            else
                row.err_fd4 = err;
        }
        rows.push_back(row);
    }
    if (!out_csv.empty()) {
        std::ofstream f(out_csv);
        f << "omega0,N,err_spectral,err_fd2,err_fd4\n" << std::setprecision(12);
        for (const auto& r : rows)
            f << r.omega0 << ',' << r.N << ',' << r.err_spectral << ',' << r.err_fd2 << ','
              << r.err_fd4 << '\n';
    }
    return rows;
}

ConvergenceReport self_convergence_cylinder(const std::vector<int>& Ns, int ref_N, CaseOverrides ov)
{
    CaseOverrides ro = ov;
    ro.N = ref_N;
    const CaseSetup ref_setup = make_case("cylinder_scatter", ro);
    const CaseResult ref = run_case(ref_setup);
    const auto ref_obs = observable_fields(Mode::Te, ref.traj.state);

    ConvergenceReport rep;
    rep.Ns = Ns;
    for (int N : Ns) {
        if (ref_N % N != 0) throw std::invalid_argument("self_convergence_cylinder: ref_N must be a multiple of each N");
        CaseOverrides o = ov;
        o.N = N;
        const CaseSetup s = make_case("cylinder_scatter", o);
        const CaseResult r = run_case(s);
        const auto obs = observable_fields(Mode::Te, r.traj.state);
        const int ratio = ref_N / N;
        const auto& grid = s.problem.grid;

        // Compare on common grid points outside the coarse penalty band, the
        // obstacle, and the absorbing strips (whose sigma_max depends on N).
        const double slab_lo = grid.origin[0] + grid.extent - 0.25;
        double errE = 0.0, errH = 0.0;
        for (int ix = 0; ix < N; ++ix) {
            for (int iy = 0; iy < N; ++iy) {
                const std::size_t ic = s.problem.grid.flatten(ix, iy);
                if (s.problem.chi[ic] != 0.0 || s.problem.phys_mask[ic] == 0.0) continue;
                if (grid.coord(0, ix) >= slab_lo || grid.coord(1, iy) >= slab_lo) continue;
                const std::size_t irf = ref_setup.problem.grid.flatten(ix * ratio, iy * ratio);
                errE = std::max({errE, std::abs(obs[0][ic] - ref_obs[0][irf]),
                                 std::abs(obs[1][ic] - ref_obs[1][irf])});
                errH = std::max(errH, std::abs(obs[2][ic] - ref_obs[2][irf]));
            }
        }
        rep.err_E.push_back(errE);
        rep.err_H.push_back(errH);
    }
    std::tie(rep.rate_E, rep.resid_E) = fit_rate(rep.err_E, Ns);
    std::tie(rep.rate_H, rep.resid_H) = fit_rate(rep.err_H, Ns);
    return rep;
}

void write_diagnostics_csv(const Trajectory& traj, const std::string& path)
{
    std::ofstream f(path);
    f << "step,t,energy_physical,energy_total,max_div_E\n" << std::setprecision(12);
    for (const auto& d : traj.diagnostics)
        f << d.step << ',' << d.t << ',' << d.energy_physical << ',' << d.energy_total << ','
          << d.max_div << '\n';
}

void write_field_csv(const Problem& p, const State& u, double t, const std::string& path)
{
    std::ofstream f(path);
    f << "# dim=" << p.grid.dim << " N=" << p.grid.n << " D=" << std::setprecision(15) << p.grid.extent
      << " origin=" << p.grid.origin[0] << ',' << p.grid.origin[1] << ',' << p.grid.origin[2]
      << " t=" << t << '\n';
    const auto names = component_names(p.mode);
    f << "i0,i1,i2";
    for (const auto& n : names) f << ',' << n;
    f << '\n' << std::setprecision(12);
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        const auto idx = p.grid.unflatten(i);
        f << idx[0] << ',' << idx[1] << ',' << idx[2];
        for (const auto& c : u.c) f << ',' << c[i];
        f << '\n';
    }
}

void write_eigs_csv(const std::vector<std::complex<double>>& eigs, const std::string& path)
{
    std::ofstream f(path);
    f << "re,im\n" << std::setprecision(15);
    for (const auto& z : eigs) f << z.real() << ',' << z.imag() << '\n';
}

}  // namespace fpm

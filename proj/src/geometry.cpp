#include "fpm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace fpm {

namespace {

std::string point_string(const Vec3& x)
{
    std::ostringstream os;
    os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ")";
    return os.str();
}

// Residual of the closest-point system f(y) = [psi(y); (y - x) x grad psi(y)].
Eigen::VectorXd newton_residual(const LevelSetGeometry& geom, const Vec3& x, const Vec3& y)
{
    const Vec3 g = geom.gradient(y);
    const Vec3 r = y - x;
    if (geom.dim == 1) {
        Eigen::VectorXd f(1);
        f[0] = geom.value(y);
        return f;
    }
    if (geom.dim == 2) {
        Eigen::VectorXd f(2);
        f[0] = geom.value(y);
        f[1] = r[0] * g[1] - r[1] * g[0];
        return f;
    }
    Eigen::VectorXd f(4);
    f[0] = geom.value(y);
    f.segment<3>(1) = r.cross(g);
    return f;
}

Eigen::MatrixXd newton_jacobian(const LevelSetGeometry& geom, const Vec3& x, const Vec3& y)
{
    const Vec3 g = geom.gradient(y);
    const Mat3 H = geom.hessian(y);
    const Vec3 r = y - x;
    if (geom.dim == 1) {
        Eigen::MatrixXd J(1, 1);
        J(0, 0) = g[0];
        return J;
    }
    if (geom.dim == 2) {
        Eigen::MatrixXd J(2, 2);
        J(0, 0) = g[0];
        J(0, 1) = g[1];
        J(1, 0) = g[1] + r[0] * H(1, 0) - r[1] * H(0, 0);
        J(1, 1) = r[0] * H(1, 1) - g[0] - r[1] * H(0, 1);
        return J;
    }
    Eigen::MatrixXd J(4, 3);
    J.row(0) = g.transpose();
    // d/dy [ (y-x) x grad psi ] = -[grad psi]_x + [y-x]_x H
    Mat3 gx, rx;
    gx << 0, -g[2], g[1], g[2], 0, -g[0], -g[1], g[0], 0;
    rx << 0, -r[2], r[1], r[2], 0, -r[0], -r[1], r[0], 0;
    J.bottomRows(3) = -gx + rx * H;
    return J;
}

int active_dim(const LevelSetGeometry& geom) { return geom.dim; }

Vec3 padded(double x, double y = 0.0, double z = 0.0) { return Vec3(x, y, z); }

}  // namespace

NewtonFailure::NewtonFailure(const Vec3& x)
    : std::runtime_error("Newton closest-point projection failed at " + point_string(x)), point(x)
{
}

NewtonResult newton_project(const LevelSetGeometry& geom, const Vec3& x, double tol, int max_iter)
{
    const int d = active_dim(geom);
    const double psi_x = geom.value(x);

    // Start at x; retry from the first-order projection (and small
    // deterministic perturbations) if the iteration stalls.
    std::vector<Vec3> starts;
    starts.push_back(x);
    {
        const Vec3 g = geom.gradient(x);
        const double g2 = g.squaredNorm();
        if (g2 > 1e-14) starts.push_back(x - (psi_x / g2) * g);
    }
    starts.push_back(x + padded(3e-3, -2e-3, 1e-3));
    starts.push_back(x + padded(-1e-3, 3e-3, -2e-3));

    for (const Vec3& y0 : starts) {
        Vec3 y = y0;
        Eigen::VectorXd f = newton_residual(geom, x, y);
        double fn = f.lpNorm<Eigen::Infinity>();
        bool stalled = false;
        for (int it = 0; it < max_iter && !stalled; ++it) {
            if (fn < tol) {
                const Vec3 gy = geom.gradient(y);
                NewtonResult res;
                res.y = y;
                res.n = gy / gy.norm();
                const double dist = (y - x).norm();
                res.s = (psi_x > 0.0) ? dist : (psi_x < 0.0 ? -dist : 0.0);
                res.iterations = it;
                return res;
            }
            const Eigen::MatrixXd J = newton_jacobian(geom, x, y);
            Eigen::VectorXd step;
            if (d == 3)
                step = J.colPivHouseholderQr().solve(-f);  // 4 equations, 3 unknowns
            else
                step = J.partialPivLu().solve(-f);
            if (!step.allFinite()) break;

            double lambda = 1.0;
            bool accepted = false;
            for (int halve = 0; halve < 20; ++halve) {
                Vec3 yt = y;
                for (int c = 0; c < d; ++c) yt[c] += lambda * step[c];
                const Eigen::VectorXd ft = newton_residual(geom, x, yt);
                const double ftn = ft.lpNorm<Eigen::Infinity>();
                if (ftn < fn) {
                    y = yt;
                    f = ft;
                    fn = ftn;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) {
                if (fn < 1e3 * tol) {  // stagnation within roundoff of the basin
                    const Vec3 gy = geom.gradient(y);
                    NewtonResult res;
                    res.y = y;
                    res.n = gy / gy.norm();
                    const double dist = (y - x).norm();
                    res.s = (psi_x > 0.0) ? dist : (psi_x < 0.0 ? -dist : 0.0);
                    res.iterations = it;
                    return res;
                }
                stalled = true;
            }
        }
        if (!stalled && fn < tol) continue;  // unreachable; loop returns above
    }
    throw NewtonFailure(x);
}

RayTable build_ray_table(const LevelSetGeometry& geom, const GridSpec& grid, double h, double L)
{
    if (h <= 0.0 || L <= 0.0) throw std::invalid_argument("build_ray_table: h and L must be positive");
    RayTable table;
    table.h = h;
    table.L = L;
    const std::size_t npts = grid.size();

    if (geom.direct_ray) {
        for (std::size_t i = 0; i < npts; ++i) {
            const auto p = grid.node(i);
            const Vec3 x = padded(p[0], p[1], p[2]);
            const auto ray = geom.direct_ray(x);
            if (!ray || ray->s < -L || ray->s > h) continue;
            table.rays.push_back({i, x, x - ray->s * ray->n, ray->n, ray->s});
        }
        return table;
    }

    const double band = std::max(L, h);
    double maxgrad = 1.0;
    if (!geom.exact_signed_distance) {
        maxgrad = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            const auto p = grid.node(i);
            maxgrad = std::max(maxgrad, geom.gradient(padded(p[0], p[1], p[2])).norm());
        }
    }
    const double candidate_band = geom.exact_signed_distance ? band * (1.0 + 1e-12) : 4.0 * maxgrad * band;
    const double certain_out = maxgrad * band;  // |psi| above this cannot be in the band

    for (std::size_t i = 0; i < npts; ++i) {
        const auto p = grid.node(i);
        const Vec3 x = padded(p[0], p[1], p[2]);
        const double psi = geom.value(x);
        if (std::abs(psi) > candidate_band) continue;
        try {
            const NewtonResult r = newton_project(geom, x);
            if (r.s < -L || r.s > h) continue;
            table.rays.push_back({i, x, r.y, r.n, r.s});
        } catch (const NewtonFailure&) {
            if (std::abs(psi) <= certain_out) throw;  // genuinely in the band
            // over-selected candidate, provably outside [-L, h]
        }
    }
    return table;
}

ScalarField mask_chi_h(const LevelSetGeometry& geom, const GridSpec& grid, double h)
{
    if (h < 0.0) throw std::invalid_argument("mask_chi_h: h must be >= 0");
    ScalarField chi = grid.make_field();
    const std::size_t npts = grid.size();

    double maxgrad = 1.0;
    const bool need_newton = !geom.exact_signed_distance && !geom.direct_ray;
    if (need_newton) {
        maxgrad = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            const auto p = grid.node(i);
            maxgrad = std::max(maxgrad, geom.gradient(padded(p[0], p[1], p[2])).norm());
        }
    }

    for (std::size_t i = 0; i < npts; ++i) {
        const auto p = grid.node(i);
        const Vec3 x = padded(p[0], p[1], p[2]);
        if (geom.direct_ray) {
            const auto ray = geom.direct_ray(x);
            const double s = ray ? ray->s : geom.value(x);
            chi[i] = (s <= h) ? 1.0 : 0.0;
            continue;
        }
        const double psi = geom.value(x);
        if (psi <= 0.0) {
            chi[i] = 1.0;
        } else if (geom.exact_signed_distance) {
            chi[i] = (psi <= h) ? 1.0 : 0.0;
        } else if (psi > 4.0 * maxgrad * h) {
            chi[i] = 0.0;
        } else {
            try {
                chi[i] = (newton_project(geom, x).s <= h) ? 1.0 : 0.0;
            } catch (const NewtonFailure&) {
                if (psi <= maxgrad * h) throw;
                chi[i] = 0.0;
            }
        }
    }
    return chi;
}

ScalarField physical_mask(const LevelSetGeometry& geom, const GridSpec& grid)
{
    ScalarField mask = grid.make_field();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto p = grid.node(i);
        mask[i] = (geom.value(padded(p[0], p[1], p[2])) > 0.0) ? 1.0 : 0.0;
    }
    return mask;
}

void write_ray_table_csv(const RayTable& table, std::ostream& out)
{
    out << "j,x0,x1,x2,y0,y1,y2,s,n0,n1,n2\n";
    for (const auto& r : table.rays) {
        out << r.index << ',' << r.x[0] << ',' << r.x[1] << ',' << r.x[2] << ',' << r.y[0] << ','
            << r.y[1] << ',' << r.y[2] << ',' << r.s << ',' << r.n[0] << ',' << r.n[1] << ','
            << r.n[2] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Built-in shapes

LevelSetGeometry make_halfspace(double x0, const GridSpec& grid)
{
    if (grid.dim != 1) throw std::invalid_argument("make_halfspace: 1D grids only");
    const double lo = grid.origin[0];
    const double D = grid.extent;
    if (x0 <= lo || x0 >= lo + D) throw std::invalid_argument("make_halfspace: x0 must be inside the box");

    // Omega_s = [lo, x0); boundary points are x0 and the seam lo + D (== lo).
    auto signed_distance = [lo, D, x0](double x) {
        double xm = std::fmod(x - lo, D);
        if (xm < 0.0) xm += D;
        xm += lo;
        if (xm >= x0) return std::min(xm - x0, lo + D - xm);
        return -std::min(x0 - xm, xm - lo);
    };
    auto ray = [lo, D, x0, signed_distance](const Vec3& x) -> std::optional<RayData> {
        double xm = std::fmod(x[0] - lo, D);
        if (xm < 0.0) xm += D;
        xm += lo;
        RayData r;
        r.s = signed_distance(x[0]);
        if (xm >= x0)
            r.n = Vec3((xm - x0 <= lo + D - xm) ? 1.0 : -1.0, 0.0, 0.0);
        else
            r.n = Vec3((x0 - xm <= xm - lo) ? 1.0 : -1.0, 0.0, 0.0);
        return r;
    };

    LevelSetGeometry g;
    g.dim = 1;
    g.exact_signed_distance = true;
    g.value = [signed_distance](const Vec3& x) { return signed_distance(x[0]); };
    g.gradient = [ray](const Vec3& x) { return (*ray(x)).n; };
    g.hessian = [](const Vec3&) { return Mat3::Zero(); };
    g.direct_ray = ray;
    return g;
}

namespace {

LevelSetGeometry radial_shape(int dim, const Vec3& center, double radius, double sign)
{
    LevelSetGeometry g;
    g.dim = dim;
    g.exact_signed_distance = true;
    g.value = [center, radius, sign](const Vec3& x) { return sign * ((x - center).norm() - radius); };
    g.gradient = [center, sign](const Vec3& x) {
        const Vec3 r = x - center;
        return Vec3(sign * r / r.norm());
    };
    g.hessian = [center, sign, dim](const Vec3& x) {
        const Vec3 r = x - center;
        const double rho = r.norm();
        const Vec3 rh = r / rho;
        Mat3 H = (Mat3::Identity() - rh * rh.transpose()) * (sign / rho);
        if (dim == 2) H.row(2).setZero(), H.col(2).setZero();
        return H;
    };
    return g;
}

}  // namespace

LevelSetGeometry make_circle_hole(double cx, double cy, double a)
{
    if (a <= 0.0) throw std::invalid_argument("make_circle_hole: radius must be positive");
    return radial_shape(2, Vec3(cx, cy, 0.0), a, 1.0);
}

LevelSetGeometry make_circular_cavity(double cx, double cy, double radius)
{
    if (radius <= 0.0) throw std::invalid_argument("make_circular_cavity: radius must be positive");
    return radial_shape(2, Vec3(cx, cy, 0.0), radius, -1.0);
}

LevelSetGeometry make_sphere_hole(double cx, double cy, double cz, double a)
{
    if (a <= 0.0) throw std::invalid_argument("make_sphere_hole: radius must be positive");
    return radial_shape(3, Vec3(cx, cy, cz), a, 1.0);
}

LevelSetGeometry make_trifolium(double a, double b)
{
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("make_trifolium: a and b must be positive");
    LevelSetGeometry g;
    g.dim = 2;
    g.exact_signed_distance = false;
    g.value = [a, b](const Vec3& p) {
        const double x = p[0], y = p[1], r2 = x * x + y * y;
        return r2 * r2 - 4.0 * a * y * x * x + a * y * r2 - b;
    };
    g.gradient = [a](const Vec3& p) {
        const double x = p[0], y = p[1], r2 = x * x + y * y;
        return Vec3(4.0 * x * r2 - 6.0 * a * x * y, 4.0 * y * r2 - 4.0 * a * x * x + a * (x * x + 3.0 * y * y),
                    0.0);
    };
    g.hessian = [a](const Vec3& p) {
        const double x = p[0], y = p[1];
        Mat3 H = Mat3::Zero();
        H(0, 0) = 12.0 * x * x + 4.0 * y * y - 6.0 * a * y;
        H(0, 1) = H(1, 0) = 8.0 * x * y - 6.0 * a * x;
        H(1, 1) = 4.0 * x * x + 12.0 * y * y + 6.0 * a * y;
        return H;
    };
    return g;
}

LevelSetGeometry make_gyroid(double a)
{
    if (a <= 0.0) throw std::invalid_argument("make_gyroid: a must be positive");
    const double w = 2.0 * M_PI;
    LevelSetGeometry g;
    g.dim = 3;
    g.exact_signed_distance = false;
    g.value = [a, w](const Vec3& p) {
        return a - std::sin(w * p[0]) * std::cos(w * p[1]) - std::sin(w * p[1]) * std::cos(w * p[2]) -
               std::sin(w * p[2]) * std::cos(w * p[0]);
    };
    g.gradient = [w](const Vec3& p) {
        const double sx = std::sin(w * p[0]), cx = std::cos(w * p[0]);
        const double sy = std::sin(w * p[1]), cy = std::cos(w * p[1]);
        const double sz = std::sin(w * p[2]), cz = std::cos(w * p[2]);
        return Vec3(-w * (cx * cy - sz * sx), -w * (-sx * sy + cy * cz), -w * (-sy * sz + cz * cx));
    };
    g.hessian = [w](const Vec3& p) {
        const double sx = std::sin(w * p[0]), cx = std::cos(w * p[0]);
        const double sy = std::sin(w * p[1]), cy = std::cos(w * p[1]);
        const double sz = std::sin(w * p[2]), cz = std::cos(w * p[2]);
        const double w2 = w * w;
        Mat3 H;
        H(0, 0) = w2 * (sx * cy + sz * cx);
        H(1, 1) = w2 * (sx * cy + sy * cz);
        H(2, 2) = w2 * (sy * cz + sz * cx);
        H(0, 1) = H(1, 0) = w2 * cx * sy;
        H(0, 2) = H(2, 0) = w2 * cz * sx;
        H(1, 2) = H(2, 1) = w2 * cy * sz;
        return H;
    };
    return g;
}

LevelSetGeometry make_shape(const ShapeSpec& spec, const GridSpec& grid)
{
    using K = ShapeSpec::Kind;
    switch (spec.kind) {
        case K::Halfspace: return make_halfspace(spec.p[0], grid);
        case K::CircleHole: return make_circle_hole(spec.p[0], spec.p[1], spec.p[2]);
        case K::CircularCavity: return make_circular_cavity(spec.p[0], spec.p[1], spec.p[2]);
        case K::SphereHole: return make_sphere_hole(spec.p[0], spec.p[1], spec.p[2], spec.p[3]);
        case K::Trifolium: return make_trifolium(spec.p[0], spec.p[1]);
        case K::Gyroid: return make_gyroid(spec.p[0]);
        case K::Waveguide: return build_waveguide(spec.p[0], spec.p[1], spec.p[2], spec.p[3], grid);
    }
    throw std::invalid_argument("make_shape: unknown shape kind");
}

// ---------------------------------------------------------------------------
// Bent waveguide

Eigen::Vector2d waveguide_segment(int segment, double tau, double r0, double l0, double y_off)
{
    switch (segment) {
        case 1: return {l0 * tau, y_off};
        case 2:
            return {l0 + r0 * std::cos(M_PI_2 * tau + M_PI), y_off + r0 * (1.0 + std::sin(M_PI_2 * tau + M_PI))};
        case 3: return {l0 + r0 * (2.0 - std::cos(M_PI * tau)), y_off + r0 * (1.0 + std::sin(M_PI * tau))};
        case 4:
            return {l0 + r0 * (4.0 + std::cos(M_PI_2 * tau - M_PI_2)),
                    y_off + r0 * (1.0 + std::sin(M_PI_2 * tau - M_PI_2))};
        case 5: return {l0 + 4.0 * r0 + l0 * (tau - 4.0), y_off};
    }
    throw std::invalid_argument("waveguide_segment: segment must be 1..5");
}

Eigen::Vector2d waveguide_centerline(double tau, double r0, double l0, double y_off)
{
    const int seg = std::clamp(static_cast<int>(std::floor(tau)) + 1, 1, 5);
    return waveguide_segment(seg, tau, r0, l0, y_off);
}

Eigen::Vector2d waveguide_tangent(double tau, double r0, double l0, double y_off)
{
    (void)y_off;
    const int seg = std::clamp(static_cast<int>(std::floor(tau)) + 1, 1, 5);
    Eigen::Vector2d d;
    switch (seg) {
        case 1:
        case 5: d = {l0, 0.0}; break;
        case 2: d = {-r0 * M_PI_2 * std::sin(M_PI_2 * tau + M_PI), r0 * M_PI_2 * std::cos(M_PI_2 * tau + M_PI)}; break;
        case 3: d = {r0 * M_PI * std::sin(M_PI * tau), r0 * M_PI * std::cos(M_PI * tau)}; break;
        default: d = {-r0 * M_PI_2 * std::sin(M_PI_2 * tau - M_PI_2), r0 * M_PI_2 * std::cos(M_PI_2 * tau - M_PI_2)}; break;
    }
    return d.normalized();
}

namespace {

// Inverse of the sampled sweep: buckets over the box hold sample indices; a
// query finds its nearest sample, then Newton-inverts the bilinear map of an
// adjacent (tau, v) cell. Folds (|v| past the bend radius) resolve to the
// branch with the smaller |v|.
struct WaveguideMap {
    double r0, l0, y_off, c;
    double box_lo_x, box_lo_y, extent;
    int ntau, nv;
    std::vector<double> xs, ys;
    int nb = 0;
    double bucket_size = 0.0;
    std::vector<std::vector<int>> buckets;

    double dtau() const { return 5.0 / (ntau - 1); }
    double dv() const { return 2.0 / (nv - 1); }
    int sample_index(int i, int j) const { return i * nv + j; }

    double wrap_delta(double d) const
    {
        d = std::fmod(d, extent);
        if (d > 0.5 * extent) d -= extent;
        if (d < -0.5 * extent) d += extent;
        return d;
    }

    int bucket_of(double x, double y) const
    {
        auto fold = [this](double v, double lo) {
            double u = std::fmod(v - lo, extent);
            if (u < 0.0) u += extent;
            return std::min(nb - 1, static_cast<int>(u / bucket_size));
        };
        return fold(x, box_lo_x) * nb + fold(y, box_lo_y);
    }

    void build(const GridSpec& grid)
    {
        box_lo_x = grid.origin[0];
        box_lo_y = grid.origin[1];
        extent = grid.extent;
        nb = 192;
        bucket_size = extent / nb;
        buckets.assign(static_cast<std::size_t>(nb) * nb, {});
        xs.resize(static_cast<std::size_t>(ntau) * nv);
        ys.resize(xs.size());
        for (int i = 0; i < ntau; ++i) {
            const double tau = i * dtau();
            const Eigen::Vector2d r = waveguide_centerline(tau, r0, l0, y_off);
            const Eigen::Vector2d t = waveguide_tangent(tau, r0, l0, y_off);
            const Eigen::Vector2d nhat(t[1], -t[0]);  // sweep normal of the parametrization
            for (int j = 0; j < nv; ++j) {
                const double v = -1.0 + j * dv();
                const Eigen::Vector2d p = r + v * nhat;
                const int id = sample_index(i, j);
                xs[static_cast<std::size_t>(id)] = p[0];
                ys[static_cast<std::size_t>(id)] = p[1];
                buckets[static_cast<std::size_t>(bucket_of(p[0], p[1]))].push_back(id);
            }
        }
    }

    // Nearest sample within a few buckets; -1 when the query is outside the
    // swept band entirely.
    int nearest_sample(double px, double py) const
    {
        auto fold = [this](double v, double lo) {
            double u = std::fmod(v - lo, extent);
            if (u < 0.0) u += extent;
            return std::min(nb - 1, static_cast<int>(u / bucket_size));
        };
        const int bi = fold(px, box_lo_x), bj = fold(py, box_lo_y);
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        const int max_ring = 4;
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (best >= 0 && (ring - 1) * bucket_size > std::sqrt(best_d2)) break;
            for (int di = -ring; di <= ring; ++di) {
                for (int dj = -ring; dj <= ring; ++dj) {
                    if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                    const int ci = ((bi + di) % nb + nb) % nb;
                    const int cj = ((bj + dj) % nb + nb) % nb;
                    for (int id : buckets[static_cast<std::size_t>(ci) * nb + cj]) {
                        const double ddx = wrap_delta(xs[static_cast<std::size_t>(id)] - px);
                        const double ddy = wrap_delta(ys[static_cast<std::size_t>(id)] - py);
                        const double d2 = ddx * ddx + ddy * ddy;
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = id;
                        }
                    }
                }
            }
        }
        return best;
    }

    bool invert_cell(int ci, int cj, double px, double py, double& tau, double& v) const
    {
        const int i00 = sample_index(ci, cj);
        const int i10 = sample_index(ci + 1, cj);
        const int i01 = sample_index(ci, cj + 1);
        const int i11 = sample_index(ci + 1, cj + 1);
        // Shift corners into the query's periodic image.
        const double bx = px + wrap_delta(xs[static_cast<std::size_t>(i00)] - px);
        const double by = py + wrap_delta(ys[static_cast<std::size_t>(i00)] - py);
        auto corner = [&](int id, double& cx, double& cy) {
            cx = bx + (xs[static_cast<std::size_t>(id)] - xs[static_cast<std::size_t>(i00)]);
            cy = by + (ys[static_cast<std::size_t>(id)] - ys[static_cast<std::size_t>(i00)]);
        };
        double x00 = bx, y00 = by, x10, y10, x01, y01, x11, y11;
        corner(i10, x10, y10);
        corner(i01, x01, y01);
        corner(i11, x11, y11);

        double a = 0.5, b = 0.5;
        for (int it = 0; it < 12; ++it) {
            const double qx = (1 - a) * (1 - b) * x00 + a * (1 - b) * x10 + (1 - a) * b * x01 + a * b * x11;
            const double qy = (1 - a) * (1 - b) * y00 + a * (1 - b) * y10 + (1 - a) * b * y01 + a * b * y11;
            const double rx = qx - px, ry = qy - py;
            if (rx * rx + ry * ry < 1e-26) break;
            const double Jxa = (1 - b) * (x10 - x00) + b * (x11 - x01);
            const double Jxb = (1 - a) * (x01 - x00) + a * (x11 - x10);
            const double Jya = (1 - b) * (y10 - y00) + b * (y11 - y01);
            const double Jyb = (1 - a) * (y01 - y00) + a * (y11 - y10);
            const double det = Jxa * Jyb - Jxb * Jya;
            if (std::abs(det) < 1e-30) return false;
            a -= (rx * Jyb - ry * Jxb) / det;
            b -= (ry * Jxa - rx * Jya) / det;
            if (a < -1.0 || a > 2.0 || b < -1.0 || b > 2.0) return false;
        }
        if (a < -0.02 || a > 1.02 || b < -0.02 || b > 1.02) return false;
        tau = (ci + a) * dtau();
        v = -1.0 + (cj + b) * dv();
        return true;
    }

    std::optional<std::pair<double, double>> locate(double px, double py) const
    {
        const int near = nearest_sample(px, py);
        if (near < 0) return std::nullopt;
        const int ni = near / nv, nj = near % nv;
        bool found = false;
        double best_tau = 0.0, best_v = 0.0;
        for (int ci = ni - 1; ci <= ni; ++ci) {
            for (int cj = nj - 1; cj <= nj; ++cj) {
                if (ci < 0 || ci >= ntau - 1 || cj < 0 || cj >= nv - 1) continue;
                double tau, v;
                if (!invert_cell(ci, cj, px, py, tau, v)) continue;
                if (!found || std::abs(v) < std::abs(best_v)) {
                    best_tau = tau;
                    best_v = v;
                    found = true;
                }
            }
        }
        if (!found) return std::nullopt;
        return std::make_pair(best_tau, best_v);
    }
};

}  // namespace

LevelSetGeometry build_waveguide(double r0, double l0, double y_off, double c, const GridSpec& grid,
                                 int ntau, int nv)
{
    if (grid.dim != 2) throw std::invalid_argument("build_waveguide: 2D grids only");
    if (r0 <= 0.0 || c <= 0.0 || c >= 1.0) throw std::invalid_argument("build_waveguide: need r0 > 0, 0 < c < 1");

    auto map = std::make_shared<WaveguideMap>();
    map->r0 = r0;
    map->l0 = l0;
    map->y_off = y_off;
    map->c = c;
    map->ntau = ntau;
    map->nv = nv;
    map->build(grid);

    const double uncovered_psi = c - 1.0;  // any point outside the sweep is at least this deep

    LevelSetGeometry g;
    g.dim = 2;
    g.exact_signed_distance = true;  // psi = c - |v| is the distance to the wall pair
    g.value = [map, uncovered_psi](const Vec3& p) {
        const auto tv = map->locate(p[0], p[1]);
        return tv ? map->c - std::abs(tv->second) : uncovered_psi;
    };
    g.gradient = [map](const Vec3& p) {
        const auto tv = map->locate(p[0], p[1]);
        if (!tv) return Vec3(0, 0, 0);
        const Eigen::Vector2d t = waveguide_tangent(tv->first, map->r0, map->l0, map->y_off);
        const double sv = (tv->second >= 0.0) ? 1.0 : -1.0;
        return Vec3(-sv * t[1], sv * t[0], 0.0);  // sign(v) * (+90 deg rotation of t)
    };
    g.hessian = [](const Vec3&) { return Mat3::Zero(); };
    g.direct_ray = [map](const Vec3& p) -> std::optional<RayData> {
        const auto tv = map->locate(p[0], p[1]);
        if (!tv) return std::nullopt;
        const double v = tv->second;
        RayData r;
        r.s = map->c - std::abs(v);
        const Eigen::Vector2d t = waveguide_tangent(tv->first, map->r0, map->l0, map->y_off);
        const double sv = (v >= 0.0) ? 1.0 : -1.0;
        // Into-physical normal: sign(v) * (-t_y, t_x). The sweep normal is
        // (t_y, -t_x); moving along it increases |v| on the v > 0 side, so the
        // level-set-consistent normal is its opposite there.
        r.n = Vec3(-sv * t[1], sv * t[0], 0.0);
        return r;
    };
    return g;
}

}  // namespace fpm

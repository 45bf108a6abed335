#pragma once

// Level-set geometry: built-in shapes with analytic gradients and Hessians,
// damped-Newton closest-point projection onto the zero level set, boundary
// ray tables over the band s in [-L, h], and the penalty mask chi_h.
//
// Sign convention: psi_hat > 0 in the physical region Omega_0, < 0 inside the
// conductor Omega_s; n = grad(psi_hat)/|grad(psi_hat)| points into Omega_0.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "fpm/grid.hpp"

namespace fpm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct RayData {
    double s = 0.0;  // signed distance, > 0 in Omega_0
    Vec3 n = Vec3::Zero();
};

struct LevelSetGeometry {
    int dim = 2;
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;
    std::function<Mat3(const Vec3&)> hessian;
    bool exact_signed_distance = false;
    // When set, closest-point data comes straight from the parametrization and
    // Newton projection is bypassed (1D half-space, sampled waveguide).
    std::function<std::optional<RayData>(const Vec3&)> direct_ray;
};

struct NewtonFailure : std::runtime_error {
    Vec3 point;
    explicit NewtonFailure(const Vec3& x);
};

struct NewtonResult {
    Vec3 y;      // closest point on Gamma
    double s;    // signed distance of x
    Vec3 n;      // unit normal at y, pointing into Omega_0
    int iterations;
};

NewtonResult newton_project(const LevelSetGeometry& geom, const Vec3& x, double tol = 1e-12,
                            int max_iter = 50);

struct BoundaryRay {
    std::size_t index;  // flat grid index of x
    Vec3 x, y, n;
    double s;
};

struct RayTable {
    std::vector<BoundaryRay> rays;
    double h = 0.0, L = 0.0;
};

RayTable build_ray_table(const LevelSetGeometry& geom, const GridSpec& grid, double h, double L);

// chi_h: 1 where dist(x, Omega_s) <= h (signed distance <= h), else 0.
ScalarField mask_chi_h(const LevelSetGeometry& geom, const GridSpec& grid, double h);

// 1 on grid points strictly inside Omega_0 (psi > 0).
ScalarField physical_mask(const LevelSetGeometry& geom, const GridSpec& grid);

void write_ray_table_csv(const RayTable& table, std::ostream& out);

// Built-in shapes. Circle/sphere/cavity/half-space are exact signed
// distances; trifolium and gyroid require Newton normalization.
LevelSetGeometry make_halfspace(double x0, const GridSpec& grid);  // Omega_s = [origin, x0)
LevelSetGeometry make_circle_hole(double cx, double cy, double a);
LevelSetGeometry make_circular_cavity(double cx, double cy, double radius);
LevelSetGeometry make_sphere_hole(double cx, double cy, double cz, double a);
LevelSetGeometry make_trifolium(double a, double b);
LevelSetGeometry make_gyroid(double a);

// Tagged shape description, resolved by make_shape.
struct ShapeSpec {
    enum class Kind { Halfspace, CircleHole, CircularCavity, SphereHole, Trifolium, Gyroid, Waveguide };
    Kind kind;
    std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};  // meaning depends on kind
};

LevelSetGeometry make_shape(const ShapeSpec& spec, const GridSpec& grid);

// Bent waveguide: piecewise line/arc centerline swept over (tau, v) in
// [0,5] x [-1,1]; psi = c - |v| interpolated onto targets from equispaced
// samples in the tau-v plane via nearest-cell bilinear inverse mapping.
Eigen::Vector2d waveguide_segment(int segment, double tau, double r0, double l0, double y_off);
Eigen::Vector2d waveguide_centerline(double tau, double r0, double l0, double y_off);
Eigen::Vector2d waveguide_tangent(double tau, double r0, double l0, double y_off);

struct WaveguideSurface {
    double r0, l0, y_off, c;
    int ntau, nv;
    std::vector<double> x, y, psi;  // ntau * nv samples, tau index major
};

LevelSetGeometry build_waveguide(double r0, double l0, double y_off, double c, const GridSpec& grid,
                                 int ntau = 2048, int nv = 512);

}  // namespace fpm

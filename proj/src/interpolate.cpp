#include "fpm/interpolate.hpp"

#include <cmath>

namespace fpm {

namespace {

inline int wrap(int j, int n) { return ((j % n) + n) % n; }

struct AxisStencil {
    int idx[4];
    double w[4];
};

inline AxisStencil axis_stencil(double p, double origin, double dx, int n)
{
    const double u = (p - origin) / dx;
    const double fl = std::floor(u);
    const int j0 = static_cast<int>(fl);
    const auto w = cubic_weights(u - fl);
    AxisStencil st;
    for (int m = 0; m < 4; ++m) {
        st.idx[m] = wrap(j0 - 1 + m, n);
        st.w[m] = w[static_cast<std::size_t>(m)];
    }
    return st;
}

}  // namespace

double interpolate(const GridSpec& grid, const ScalarField& f, const std::array<double, 3>& point)
{
    if (f.size() != grid.size()) throw std::invalid_argument("interpolate: field/grid size mismatch");
    const int n = grid.n;
    const double dx = grid.dx();

    const AxisStencil sx = axis_stencil(point[0], grid.origin[0], dx, n);
    if (grid.dim == 1) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) acc += sx.w[a] * f[static_cast<std::size_t>(sx.idx[a])];
        return acc;
    }

    const AxisStencil sy = axis_stencil(point[1], grid.origin[1], dx, n);
    if (grid.dim == 2) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            const std::size_t row = static_cast<std::size_t>(sx.idx[a]) * n;
            double line = 0.0;
            for (int b = 0; b < 4; ++b) line += sy.w[b] * f[row + sy.idx[b]];
            acc += sx.w[a] * line;
        }
        return acc;
    }

    const AxisStencil sz = axis_stencil(point[2], grid.origin[2], dx, n);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        const std::size_t plane = static_cast<std::size_t>(sx.idx[a]) * n;
        double slab = 0.0;
        for (int b = 0; b < 4; ++b) {
            const std::size_t row = (plane + sy.idx[b]) * n;
            double line = 0.0;
            for (int c = 0; c < 4; ++c) line += sz.w[c] * f[row + sz.idx[c]];
            slab += sy.w[b] * line;
        }
        acc += sx.w[a] * slab;
    }
    return acc;
}

std::vector<double> interpolate(const GridSpec& grid, const ScalarField& f,
                                const std::vector<std::array<double, 3>>& points)
{
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(interpolate(grid, f, p));
    return out;
}

}  // namespace fpm

#pragma once

// Periodic equispaced grid bookkeeping: N (even) points per axis on a box
// [origin, origin + D)^dim, row-major storage over axes (x slowest).

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fpm {

using ScalarField = std::vector<double>;

struct GridSpec {
    int dim = 1;
    int n = 0;        // points per axis, even
    double extent = 0.0;  // box side length D, equal per axis
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    GridSpec() = default;
    GridSpec(int dim_, int n_, double extent_, std::array<double, 3> origin_ = {0.0, 0.0, 0.0})
        : dim(dim_), n(n_), extent(extent_), origin(origin_)
    {
        if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
        if (n <= 0 || n % 2 != 0) throw std::invalid_argument("GridSpec: N must be positive and even");
        if (extent <= 0.0) throw std::invalid_argument("GridSpec: box length must be positive");
    }

    double dx() const { return extent / n; }

    std::size_t size() const
    {
        std::size_t s = 1;
        for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(n);
        return s;
    }

    double coord(int axis, int index) const { return origin[static_cast<std::size_t>(axis)] + dx() * index; }

    std::size_t flatten(int ix, int iy = 0, int iz = 0) const
    {
        switch (dim) {
            case 1: return static_cast<std::size_t>(ix);
            case 2: return static_cast<std::size_t>(ix) * n + iy;
            default: return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
        }
    }

    std::array<int, 3> unflatten(std::size_t flat) const
    {
        std::array<int, 3> idx{0, 0, 0};
        switch (dim) {
            case 1: idx[0] = static_cast<int>(flat); break;
            case 2:
                idx[1] = static_cast<int>(flat % n);
                idx[0] = static_cast<int>(flat / n);
                break;
            default:
                idx[2] = static_cast<int>(flat % n);
                flat /= n;
                idx[1] = static_cast<int>(flat % n);
                idx[0] = static_cast<int>(flat / n);
                break;
        }
        return idx;
    }

    std::array<double, 3> node(std::size_t flat) const
    {
        const auto idx = unflatten(flat);
        std::array<double, 3> p{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) p[static_cast<std::size_t>(d)] = coord(d, idx[static_cast<std::size_t>(d)]);
        return p;
    }

    ScalarField make_field(double fill = 0.0) const { return ScalarField(size(), fill); }
};

// Wavenumbers in DFT index order: k_l = 2*pi*l/D for l <= N/2, 2*pi*(l-N)/D above.
std::vector<double> wavenumbers(int n, double extent);

}  // namespace fpm

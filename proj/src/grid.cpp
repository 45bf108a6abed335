#include "fpm/grid.hpp"

#include <cmath>

namespace fpm {

std::vector<double> wavenumbers(int n, double extent)
{
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("wavenumbers: N must be positive and even");
    if (extent <= 0.0) throw std::invalid_argument("wavenumbers: box length must be positive");
    std::vector<double> k(static_cast<std::size_t>(n));
    const double scale = 2.0 * M_PI / extent;
    for (int l = 0; l <= n / 2; ++l) k[static_cast<std::size_t>(l)] = scale * l;
    for (int l = n / 2 + 1; l < n; ++l) k[static_cast<std::size_t>(l)] = scale * (l - n);
    return k;
}

}  // namespace fpm

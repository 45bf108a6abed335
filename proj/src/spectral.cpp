#include "fpm/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace fpm {

namespace {

// One cached in-place c2c plan per (n, stride) line family. Plans are created
// with FFTW_UNALIGNED so they can be replayed on any buffer via
// fftw_execute_dft; creation is serialized, execution is thread-safe.
struct AxisPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::map<std::tuple<int, int>, AxisPlans>& plan_cache()
{
    static std::map<std::tuple<int, int>, AxisPlans> cache;
    return cache;
}

std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}

AxisPlans get_plans(int n, int inner)
{
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto& cache = plan_cache();
    auto it = cache.find({n, inner});
    if (it != cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * inner);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    AxisPlans plans;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans.fwd = fftw_plan_many_dft(1, &n, inner, buf, nullptr, inner, 1, buf, nullptr, inner, 1,
                                   FFTW_FORWARD, flags);
    plans.bwd = fftw_plan_many_dft(1, &n, inner, buf, nullptr, inner, 1, buf, nullptr, inner, 1,
                                   FFTW_BACKWARD, flags);
    cache[{n, inner}] = plans;
    return plans;
}

void check_field(const GridSpec& grid, const ScalarField& f, const char* what)
{
    if (f.size() != grid.size()) throw std::invalid_argument(std::string(what) + ": field/grid size mismatch");
}

}  // namespace

void dft_axis(const GridSpec& grid, int axis, std::vector<std::complex<double>>& data, bool inverse)
{
    if (axis < 0 || axis >= grid.dim) throw std::invalid_argument("dft_axis: axis out of range");
    const int n = grid.n;
    std::size_t inner = 1;
    for (int d = axis + 1; d < grid.dim; ++d) inner *= static_cast<std::size_t>(n);
    std::size_t outer = 1;
    for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(n);

    const AxisPlans plans = get_plans(n, static_cast<int>(inner));
    auto* base = reinterpret_cast<fftw_complex*>(data.data());
    const std::size_t slab = static_cast<std::size_t>(n) * inner;
    for (std::size_t o = 0; o < outer; ++o)
        fftw_execute_dft(inverse ? plans.bwd : plans.fwd, base + o * slab, base + o * slab);

    if (inverse) {
        const double scale = 1.0 / n;
        for (auto& z : data) z *= scale;
    }
}

ScalarField spectral_derivative(const GridSpec& grid, const ScalarField& f, int axis, int order,
                                std::optional<double> filter_cf)
{
    check_field(grid, f, "spectral_derivative");
    if (order != 1 && order != 2) throw std::invalid_argument("spectral_derivative: order must be 1 or 2");
    if (filter_cf && *filter_cf < 0.0) throw std::invalid_argument("spectral_derivative: c_f must be >= 0");

    const int n = grid.n;
    const auto k = wavenumbers(n, grid.extent);
    std::vector<std::complex<double>> mult(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const double kl = k[static_cast<std::size_t>(l)];
        std::complex<double> c = (order == 1) ? std::complex<double>(0.0, kl)
                                              : std::complex<double>(-kl * kl, 0.0);
        if (order % 2 == 1 && l == n / 2) c = 0.0;  // keep real fields real
        if (filter_cf) c *= std::exp(-(*filter_cf) * kl * kl / (static_cast<double>(n) * n));
        mult[static_cast<std::size_t>(l)] = c;
    }

    std::vector<std::complex<double>> buf(f.begin(), f.end());
    dft_axis(grid, axis, buf, false);

    std::size_t inner = 1;
    for (int d = axis + 1; d < grid.dim; ++d) inner *= static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mult[(i / inner) % n];

    dft_axis(grid, axis, buf, true);

    ScalarField out(f.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

ScalarField divergence(const GridSpec& grid, const std::vector<ScalarField>& E)
{
    if (static_cast<int>(E.size()) != grid.dim) throw std::invalid_argument("divergence: need dim components");
    ScalarField div = grid.make_field();
    for (int a = 0; a < grid.dim; ++a) {
        const ScalarField da = spectral_derivative(grid, E[static_cast<std::size_t>(a)], a, 1);
        for (std::size_t i = 0; i < div.size(); ++i) div[i] += da[i];
    }
    return div;
}

std::vector<ScalarField> project_divergence_free(const GridSpec& grid, const std::vector<ScalarField>& E,
                                                 const ScalarField& chi_h)
{
    if (grid.dim < 2) throw std::invalid_argument("project_divergence_free: dim must be >= 2");
    for (const auto& c : E) check_field(grid, c, "project_divergence_free");
    if (!chi_h.empty()) check_field(grid, chi_h, "project_divergence_free");

    ScalarField div = divergence(grid, E);
    if (!chi_h.empty())
        for (std::size_t i = 0; i < div.size(); ++i) div[i] *= 1.0 - chi_h[i];

    // p_hat = -div_hat / k_eff^2 with the same Nyquist-zeroed symbol as the
    // derivative operator, so grad(p) cancels the masked divergence exactly.
    std::vector<std::complex<double>> p_hat(div.begin(), div.end());
    for (int a = 0; a < grid.dim; ++a) dft_axis(grid, a, p_hat, false);

    const int n = grid.n;
    const auto k = wavenumbers(n, grid.extent);
    auto k_tilde = [&](int l) { return l == n / 2 ? 0.0 : k[static_cast<std::size_t>(l)]; };

    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        std::size_t rem = i;
        double k2 = 0.0;
        for (int a = grid.dim - 1; a >= 0; --a) {
            const int l = static_cast<int>(rem % n);
            rem /= n;
            const double ka = k_tilde(l);
            k2 += ka * ka;
        }
        p_hat[i] = (k2 > 0.0) ? -p_hat[i] / k2 : 0.0;
    }

    std::vector<ScalarField> out = E;
    std::size_t inner = grid.size();
    for (int a = 0; a < grid.dim; ++a) {
        inner /= static_cast<std::size_t>(n);
        std::vector<std::complex<double>> grad = p_hat;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const int l = static_cast<int>((i / inner) % n);
            grad[i] *= std::complex<double>(0.0, k_tilde(l));
        }
        for (int b = 0; b < grid.dim; ++b) dft_axis(grid, b, grad, true);
        auto& comp = out[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= grad[i].real();
    }
    return out;
}

}  // namespace fpm

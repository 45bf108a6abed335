#include "fpm/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace fpm {

namespace {

double packet(double alpha, double sigma, double omega0)
{
    const double r = alpha / sigma;
    return std::exp(-0.5 * r * r) * std::sin(omega0 * alpha);
}

}  // namespace

void gaussian_1d_exact(double x, double t, const PulseParams& p, double& H_y, double& E_z)
{
    const double chi0 = (x >= 0.0) ? 1.0 : 0.0;
    const double incident = packet(t + x - p.x0, p.sigma, p.omega0);
    const double reflected = packet(t - x - p.x0, p.sigma, p.omega0);
    H_y = p.E0 * (incident + reflected) * chi0;
    E_z = p.E0 * (incident - reflected) * chi0;
}

void manufactured_tm_exact(double x, double y, double t, double& H_x, double& H_y, double& E_z)
{
    H_x = std::sin(x) * std::sin(y) * std::sin(t);
    H_y = std::cos(x) * std::cos(y) * std::sin(t);
    E_z = std::sin(x) * std::cos(y) * std::cos(t);
}

void manufactured_te_exact(double x, double y, double t, double& E_x, double& E_y, double& H_z)
{
    E_x = -std::sin(x) * std::sin(y) * std::sin(t);
    E_y = -std::cos(x) * std::cos(y) * std::sin(t);
    H_z = std::sin(x) * std::cos(y) * std::cos(t);
}

double manufactured_forcing(double x, double y, double t)
{
    return std::sin(x) * std::cos(y) * std::sin(t);
}

double bessel_j(int order, double x)
{
    if (order < 0) throw std::invalid_argument("bessel_j: order must be >= 0");
    if (x < 0.0) throw std::invalid_argument("bessel_j: x must be >= 0");
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;

    if (x < 12.0) {
        // Power series: sum_m (-1)^m (x/2)^{order+2m} / (m! (order+m)!)
        double term = std::exp(order * std::log(0.5 * x) - std::lgamma(order + 1.0));
        double sum = term;
        const double q = 0.25 * x * x;
        for (int m = 1; m < 200; ++m) {
            term *= -q / (m * static_cast<double>(m + order));
            sum += term;
            if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
        }
        return sum;
    }

    // Downward recurrence normalized by J_0 + 2 sum J_{2k} = 1.
    const int start = std::max(order, static_cast<int>(x)) + 40;
    double jp = 0.0, jc = 1e-30;
    double target = (order == start) ? jc : 0.0;
    double norm = (start % 2 == 0) ? 2.0 * jc : 0.0;
    for (int l = start; l >= 1; --l) {
        double jm = (2.0 * l / x) * jc - jp;
        jp = jc;
        jc = jm;
        if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
        const int idx = l - 1;
        if (idx == order) target = jc;
        if (idx == 0)
            norm += jc;
        else if (idx % 2 == 0)
            norm += 2.0 * jc;
    }
    return target / norm;
}

double bessel_j_root(int order, int j)
{
    if (j < 1) throw std::invalid_argument("bessel_j_root: root index must be >= 1");
    const double step = 0.1;
    double a = 0.05;
    double fa = bessel_j(order, a);
    int found = 0;
    for (int i = 0; i < 10000; ++i) {
        const double b = a + step;
        const double fb = bessel_j(order, b);
        if (fa == 0.0 || fa * fb < 0.0) {
            ++found;
            if (found == j) {
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = bessel_j(order, mid);
                    if (flo * fm <= 0.0)
                        hi = mid;
                    else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
    throw std::runtime_error("bessel_j_root: root not found in scan range");
}

CavityFields cavity_mode_exact(int order, double alpha, double rho, double phi, double t)
{
    CavityFields f{};
    const double ct = std::cos(alpha * t);
    const double st = std::sin(alpha * t);
    const double cp = std::cos(order * phi);
    const double sp = std::sin(order * phi);

    double radial;  // order/(alpha rho) * J_order(alpha rho), by limit at rho = 0
    if (rho < 1e-12)
        radial = (order == 1) ? 0.5 : 0.0;
    else
        radial = order / (alpha * rho) * bessel_j(order, alpha * rho);

    f.H_rho = radial * sp * st;
    f.H_phi = 0.5 *
              ((order >= 1 ? bessel_j(order - 1, alpha * rho) : -bessel_j(1, alpha * rho)) -
               bessel_j(order + 1, alpha * rho)) *
              cp * st;
    f.E_z = bessel_j(order, alpha * rho) * cp * ct;
    f.H_x = f.H_rho * std::cos(phi) - f.H_phi * std::sin(phi);
    f.H_y = f.H_rho * std::sin(phi) + f.H_phi * std::cos(phi);
    return f;
}

void standing_wave_3d_exact(const Vec3& x, double t, Vec3& E, Vec3& H)
{
    const double s3 = std::sqrt(3.0);
    const Vec3 k = Vec3(1.0, 1.0, 1.0) / s3;
    const Vec3 E0(1.0, -2.0, 1.0);
    const double phase = s3 * k.dot(x);
    E = 2.0 * E0 * std::cos(s3 * t) * std::cos(phase);
    H = 2.0 * k.cross(E0) * std::sin(s3 * t) * std::sin(phase);
}

namespace {

std::complex<double> gamma_branch(double eta, double omega, double ky)
{
    const std::complex<double> gamma2(omega * omega - ky * ky, -omega / eta);
    std::complex<double> g = std::sqrt(gamma2);
    // Radiation condition: Re{i gamma} >= 0, ties broken by Im{i gamma} <= 0.
    if (-g.imag() < 0.0) g = -g;
    if (g.imag() == 0.0 && g.real() > 0.0) g = -g;
    return g;
}

}  // namespace

std::complex<double> reflection_matching(double eta, double h, double kx, double ky)
{
    if (eta <= 0.0 || h <= 0.0) throw std::invalid_argument("reflection_matching: eta, h must be positive");
    const double omega = std::hypot(kx, ky);
    if (omega == 0.0) throw std::invalid_argument("reflection_matching: omega must be nonzero");

    using C = std::complex<double>;
    const C i(0.0, 1.0);
    const C gamma = gamma_branch(eta, omega, ky);
    const C g2 = gamma * gamma;
    const C cA = i * omega / (eta * h * (h + 1.0));       // A = cA * (1 - R) for E_i = 1
    const C B1 = 2.0 / (g2 * g2) - (h + h * h) / g2;      // particular solution at x = h
    const C B2 = -(1.0 + 2.0 * h) / g2;                   // its derivative at x = h

    // Continuity of E and of dE/dx at x = h:
    //   E0 + (1 - cA B1) R = 1 - cA B1
    //   i gamma E0 - (cA B2 + i kx) R = i kx - cA B2
    const C m00 = 1.0, m01 = 1.0 - cA * B1;
    const C m10 = i * gamma, m11 = -(cA * B2 + i * kx);
    const C b0 = 1.0 - cA * B1;
    const C b1 = i * kx - cA * B2;
    const C det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-300) throw std::runtime_error("reflection_matching: singular matching system");
    return (m00 * b1 - m10 * b0) / det;
}

std::complex<double> reflection_expansion(double eta, double h, double kx, double ky)
{
    const double omega = std::hypot(kx, ky);
    if (omega == 0.0) throw std::invalid_argument("reflection_expansion: omega must be nonzero");
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    return (1.0 - 2.0 * i * h * kx) -
           2.0 * std::sqrt(2.0) * (1.0 + i) * kx / std::sqrt(omega) * std::sqrt(eta) * h +
           2.0 * kx * (kx * kx - 4.0) / omega * eta * h;
}

}  // namespace fpm

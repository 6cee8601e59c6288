// specfun.hpp -- real-argument Bessel functions J0, J1, Y0, Y1 and the
// outgoing Hankel functions H0^(1), H1^(1).
//
// Two-regime evaluation: ascending power series (accumulated in long double
// to tame the cancellation that grows like e^x) for x <= 12, and the Hankel
// large-argument expansion summed to its smallest term for x > 12.  Both
// branches overlap with full accuracy on [10, 14], which the test suite
// cross-checks.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace scatlab {

namespace detail {

inline constexpr double kSeriesAsymptoticSplit = 12.0;
inline constexpr long double kEulerGamma = 0.5772156649015328606065120900824024L;

// J_nu by ascending series, nu in {0,1}.
inline long double bessel_j_series(int order, long double x) {
    const long double q = 0.25L * x * x;
    long double term = (order == 0) ? 1.0L : 0.5L * x;
    long double sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + order));
        sum += term;
        if (std::abs(term) < 1e-24L * (1.0L + std::abs(sum))) break;
    }
    return sum;
}

// Y0 ascending series: (2/pi)[(ln(x/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2].
inline long double bessel_y0_series(long double x) {
    const long double q = 0.25L * x * x;
    long double term = 1.0L;   // q^k/(k!)^2 at k=0
    long double hk = 0.0L;
    long double sum = 0.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        hk += 1.0L / k;
        const long double contrib = ((k & 1) ? 1.0L : -1.0L) * hk * term;
        sum += contrib;
        if (std::abs(contrib) < 1e-24L * (1.0L + std::abs(sum))) break;
    }
    const long double j0 = bessel_j_series(0, x);
    const long double pi = 3.141592653589793238462643383279503L;
    return (2.0L / pi) * ((std::log(0.5L * x) + kEulerGamma) * j0 + sum);
}

// Y1 ascending series:
// (2/pi)(ln(x/2)+gamma) J1 - 2/(pi x) - (x/(2 pi)) sum_k (-1)^k (H_k + H_{k+1}) q^k/(k!(k+1)!).
inline long double bessel_y1_series(long double x) {
    const long double q = 0.25L * x * x;
    long double term = 1.0L;   // q^k/(k!(k+1)!) at k=0
    long double hk = 0.0L;
    long double hk1 = 1.0L;
    long double sum = hk + hk1;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * (k + 1));
        hk += 1.0L / k;
        hk1 += 1.0L / (k + 1);
        const long double contrib = (hk + hk1) * term;
        sum += contrib;
        if (std::abs(contrib) < 1e-24L * (1.0L + std::abs(sum))) break;
    }
    const long double j1 = bessel_j_series(1, x);
    const long double pi = 3.141592653589793238462643383279503L;
    return (2.0L / pi) * (std::log(0.5L * x) + kEulerGamma) * j1
         - 2.0L / (pi * x)
         - (x / (2.0L * pi)) * sum;
}

// Hankel expansion of H^(1)_nu(x) for large x, truncated at the smallest term:
//   H^(1)_nu(x) ~ sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} sum_k i^k (nu,k)/(2x)^k.
inline std::complex<long double> hankel1_asymptotic(int order, long double x) {
    const long double mu = 4.0L * order * order;
    std::complex<long double> term(1.0L, 0.0L);
    std::complex<long double> sum = term;
    long double prev_mag = 1.0L;
    const std::complex<long double> iu(0.0L, 1.0L);
    for (int k = 0; k < 200; ++k) {
        const long double factor = (mu - (2.0L * k + 1.0L) * (2.0L * k + 1.0L))
                                 / (8.0L * (k + 1.0L));
        term *= iu * factor / x;
        const long double mag = std::abs(term);
        if (mag >= prev_mag || mag < 1e-24L) {
            if (mag < prev_mag) sum += term;
            break;
        }
        sum += term;
        prev_mag = mag;
    }
    const long double pi = 3.141592653589793238462643383279503L;
    const long double chi = x - (0.5L * order + 0.25L) * pi;
    const std::complex<long double> phase(std::cos(chi), std::sin(chi));
    return std::sqrt(2.0L / (pi * x)) * phase * sum;
}

inline void check_order(int order) {
    if (order != 0 && order != 1)
        throw std::invalid_argument("specfun: order must be 0 or 1");
}

} // namespace detail

/// Bessel function of the first kind, order 0 or 1, x >= 0.
inline double bessel_j(int order, double x) {
    detail::check_order(order);
    if (x < 0.0) throw std::invalid_argument("bessel_j: negative argument");
    if (x <= detail::kSeriesAsymptoticSplit)
        return static_cast<double>(detail::bessel_j_series(order, x));
    return static_cast<double>(detail::hankel1_asymptotic(order, x).real());
}

/// Bessel function of the second kind, order 0 or 1, x > 0.
inline double bessel_y(int order, double x) {
    detail::check_order(order);
    if (x <= 0.0) throw std::invalid_argument("bessel_y: argument must be positive");
    if (x <= detail::kSeriesAsymptoticSplit)
        return static_cast<double>(order == 0 ? detail::bessel_y0_series(x)
                                              : detail::bessel_y1_series(x));
    return static_cast<double>(detail::hankel1_asymptotic(order, x).imag());
}

/// Outgoing Hankel function H^(1) = J + iY, order 0 or 1, x > 0.
inline std::complex<double> hankel1(int order, double x) {
    detail::check_order(order);
    if (x <= 0.0) throw std::invalid_argument("hankel1: argument must be positive");
    if (x <= detail::kSeriesAsymptoticSplit) {
        const double re = static_cast<double>(detail::bessel_j_series(order, x));
        const double im = static_cast<double>(order == 0 ? detail::bessel_y0_series(x)
                                                         : detail::bessel_y1_series(x));
        return {re, im};
    }
    const auto h = detail::hankel1_asymptotic(order, x);
    return {static_cast<double>(h.real()), static_cast<double>(h.imag())};
}

} // namespace scatlab

// resolvent.hpp -- outgoing Helmholtz resolvent R_k as an FFT-diagonal
// convolution with the radially truncated 2D outgoing kernel
//
//     K_rho(x) = -(i/4) H0^(1)(k|x|) 1{|x| <= rho},
//
// i.e. the kernel of (Delta + k^2 + i0)^{-1}, whose Fourier multiplier tends
// to 1/(k^2 - |xi|^2). The truncated kernel's transform has the closed form
//
//     sigma(s) = (1 - W(s)) / (k^2 - s^2),
//     W(s)     = (i pi/2) rho [ k J0(s rho) H1(k rho) - s J1(s rho) H0(k rho) ],
//
// obtained from the Lommel cross-product integral; the Wronskian makes the
// numerator vanish at s = k, so the singularity is removable and a Taylor
// branch takes over on near-resonant bins.

#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "scatlab/grid.hpp"
#include "scatlab/specfun.hpp"

namespace scatlab {

struct ResolventSymbol {
    GridSpec spec;
    double k = 0.0;
    double rho = 0.0;
    std::vector<cplx> values;   // multiplier samples, Field[Frequency] indexing

    const cplx& at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n + j]; }
};

namespace detail {

// J0(s rho), J1(s rho) per frequency bin; k-independent, shared across all
// symbols on the same (grid, rho).
struct RadialBesselTable {
    std::vector<double> s;
    std::vector<double> j0;
    std::vector<double> j1;
};

inline std::shared_ptr<const RadialBesselTable>
radial_table(const GridSpec& spec, double rho) {
    using Key = std::tuple<int, double, double>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const RadialBesselTable>> cache;
    const Key key{spec.n, spec.half_width, rho};
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<RadialBesselTable>();
    const std::size_t count = spec.size();
    table->s.resize(count);
    table->j0.resize(count);
    table->j1.resize(count);
    // many bins share |xi|; evaluate each distinct radius once
    std::map<long long, std::pair<double, double>> by_r2;
    for (int i = 0; i < spec.n; ++i) {
        const long long wi = wrap_index(i, spec.n);
        for (int j = 0; j < spec.n; ++j) {
            const long long wj = wrap_index(j, spec.n);
            const long long r2 = wi * wi + wj * wj;
            const std::size_t idx = static_cast<std::size_t>(i) * spec.n + j;
            auto it = by_r2.find(r2);
            if (it == by_r2.end()) {
                const double s = (M_PI / spec.half_width) * std::sqrt(static_cast<double>(r2));
                it = by_r2.emplace(r2, std::make_pair(bessel_j(0, s * rho),
                                                      bessel_j(1, s * rho))).first;
            }
            const double s = (M_PI / spec.half_width) * std::sqrt(static_cast<double>(r2));
            table->s[idx] = s;
            table->j0[idx] = it->second.first;
            table->j1[idx] = it->second.second;
        }
    }
    std::lock_guard<std::mutex> lock(mutex);
    auto [it, inserted] = cache.emplace(key, std::move(table));
    return it->second;
}

// Closed-form evaluation data for one wavenumber. The generic branch is the
// Lommel cross-product formula; the Taylor branch covers the removable
// singularity at s = k.
struct SymbolTerms {
    double k = 0.0;
    double rho = 0.0;
    cplx h0z, h1z;        // H0^(1), H1^(1) at k rho
    cplx wp, wpp;         // W'(k), W''(k)
    double branch_width = 0.0;

    static SymbolTerms make(double k, double rho) {
        SymbolTerms t;
        t.k = k;
        t.rho = rho;
        const double z = k * rho;
        t.h0z = hankel1(0, z);
        t.h1z = hankel1(1, z);
        const double j0z = t.h0z.real();
        const double j1z = t.h1z.real();
        const cplx half_ipi_rho = cplx{0.0, M_PI / 2.0} * rho;
        // W'(k)  = -(i pi/2) rho^2 k [J1 H1 + J0 H0](k rho)
        // W''(k) =  (i pi/2) rho^2 [(J1 - z J0) H1 + (z J1 - J0) H0](k rho)
        t.wp = -half_ipi_rho * rho * k * (j1z * t.h1z + j0z * t.h0z);
        t.wpp = half_ipi_rho * rho * ((j1z - z * j0z) * t.h1z + (z * j1z - j0z) * t.h0z);
        t.branch_width = 1e-6 * std::max(k, 1.0);
        return t;
    }

    cplx generic(double s, double j0_srho, double j1_srho) const {
        const cplx w = cplx{0.0, M_PI / 2.0} * rho *
                       (k * j0_srho * h1z - s * j1_srho * h0z);
        return (1.0 - w) / (k * k - s * s);
    }

    cplx taylor(double s) const { return (wp + 0.5 * wpp * (s - k)) / (s + k); }
};

} // namespace detail

/// Builds the resolvent multiplier for wavenumber k and truncation radius rho.
inline ResolventSymbol kernel_symbol(const GridSpec& spec, double k, double rho) {
    if (!(k > 0.0)) throw std::invalid_argument("kernel_symbol: k must be positive");
    if (!(rho > 0.0) || rho > 2.0 * spec.half_width)
        throw std::invalid_argument("kernel_symbol: rho out of range (0, 2L]");

    const auto table = detail::radial_table(spec, rho);
    const auto terms = detail::SymbolTerms::make(k, rho);

    ResolventSymbol sym;
    sym.spec = spec;
    sym.k = k;
    sym.rho = rho;
    sym.values.resize(spec.size());
    for (std::size_t idx = 0; idx < sym.values.size(); ++idx) {
        const double s = table->s[idx];
        sym.values[idx] = std::abs(s - k) < terms.branch_width
                              ? terms.taylor(s)
                              : terms.generic(s, table->j0[idx], table->j1[idx]);
    }
    return sym;
}

/// R_k f = to_phys(sigma . to_freq(f)).
inline Field apply_resolvent(const ResolventSymbol& sigma, const Field& f) {
    if (f.spec != sigma.spec)
        throw std::invalid_argument("apply_resolvent: grid mismatch");
    Field fhat = to_freq(f);
    for (std::size_t idx = 0; idx < fhat.data.size(); ++idx)
        fhat.data[idx] *= sigma.values[idx];
    return to_phys(fhat);
}

} // namespace scatlab

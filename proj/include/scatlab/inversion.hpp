// inversion.hpp -- the inverse algorithm: Born inversion of the dataset, the
// Born-series operators Q_j, the cutoff-modified map T_m, the fixed-point
// sequence q_{m,l}, and the resolve-every-frequency baseline iteration used
// for the speed comparison.
//
// All spectral assembly happens on the inverse grid. Bins without a solvable
// (k, theta) carry no correction on either side: the data stores a Born-only
// value there and the Q_j sweep leaves them at zero, so the algorithm and its
// data share one band limit.

#pragma once

#include <chrono>
#include <cmath>
#include <list>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "scatlab/ewald.hpp"
#include "scatlab/forward.hpp"
#include "scatlab/grid.hpp"
#include "scatlab/parallel.hpp"
#include "scatlab/resolvent.hpp"
#include "scatlab/scene.hpp"

namespace scatlab {

// ---------------------------------------------------------------------------
// Symbol cache: one resolvent multiplier per distinct wavenumber, shared by
// every sweep. Keys quantize k to ~1e-12 relative so recomputed wavenumbers
// hit the same entry; a bounded LRU keeps memory in check at large n.
// ---------------------------------------------------------------------------

class SymbolCache {
public:
    explicit SymbolCache(std::size_t max_entries = 4096) : max_entries_(max_entries) {}

    std::shared_ptr<const ResolventSymbol> get(const GridSpec& spec, double k, double rho) {
        const std::uint64_t key = quantize(k);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end() && it->second->second->spec == spec) {
                lru_.splice(lru_.begin(), lru_, it->second);
                return it->second->second;
            }
        }
        auto sym = std::make_shared<const ResolventSymbol>(kernel_symbol(spec, k, rho));
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            if (it->second->second->spec == spec) return it->second->second;
            lru_.erase(it->second);
            map_.erase(it);
        }
        lru_.emplace_front(key, sym);
        map_[key] = lru_.begin();
        if (map_.size() > max_entries_) {
            map_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return sym;
    }

private:
    static std::uint64_t quantize(double k) {
        int exponent = 0;
        const double mantissa = std::frexp(k, &exponent);   // in [0.5, 1)
        const auto q = static_cast<std::uint64_t>(std::llround(mantissa * 4.0e12));
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(exponent)) << 42) ^ q;
    }

    using Entry = std::pair<std::uint64_t, std::shared_ptr<const ResolventSymbol>>;
    std::mutex mutex_;
    std::list<Entry> lru_;
    std::unordered_map<std::uint64_t, std::list<Entry>::iterator> map_;
    std::size_t max_entries_;
};

struct RecoveryParams {
    int m = 2;                 // Born-series depth
    int l_max = 6;             // fixed-point iterations (iterates q_{m,1..l_max})
    double stop_tol = 0.0;     // relative Cauchy stop; 0 runs exactly l_max
    Cutoff cutoff;
    double rho = 0.0;          // <= 0: L
    int threads = 0;
};

struct RecoveryTrace {
    std::vector<Field> iterates;          // q_{m,1}, q_{m,2}, ...
    std::vector<double> cauchy_norms;     // ||q_{m,l+1} - q_{m,l}||_2
    std::vector<double> imag_norms;       // ||Im q_{m,l}||_2 per produced iterate
    std::vector<double> iter_seconds;     // wall clock per produced iterate
    int solver_failures = 0;              // baseline iteration only
};

/// Assembles the Born approximation: F(xi) = u_inf on recorded bins, the
/// stored Born-only sample on omitted bins, and returns its inverse
/// transform (kept complex).
inline Field born_from_data(const ScatteringDataSet& d) {
    Field fhat(d.inverse_spec, Space::Frequency);
    for (const ScatterRecord& r : d.records) fhat.at(r.i, r.j) = r.u_inf;
    for (const OmittedBin& o : d.omitted) fhat.at(o.i, o.j) = o.u_born;
    return to_phys(fhat);
}

namespace detail {

// One sweep over the dataset records: for each record, chain
// v_0 = q e^{i k (sign theta0).x},  v_{r+1} = q R_k v_r,
// and hand every far-field sample Q_j(xi) = h^2 sum e^{-i k theta.y} v_j(y)
// to the sink. Records are independent; the sweep parallelizes over them.
template <typename Sink>
inline void q_hat_sweep(const Field& q, int m_max, const ScatteringDataSet& d,
                        SymbolCache& cache, double rho, int threads, const Sink& sink) {
    if (q.spec != d.inverse_spec)
        throw std::invalid_argument("q_hat_sweep: potential not on the inverse grid");
    const double rho_eff = rho > 0.0 ? rho : d.inverse_spec.half_width;
    parallel_for(d.records.size(), threads, [&](std::size_t ridx) {
        const ScatterRecord& rec = d.records[ridx];
        const auto sigma = cache.get(q.spec, rec.k, rho_eff);
        const Vec2 theta_inc{rec.sign * d.theta0.x, rec.sign * d.theta0.y};
        Field v = detail::times_plane_wave(q, rec.k, theta_inc);
        for (int j = 1; j <= m_max; ++j) {
            const Field rv = apply_resolvent(*sigma, v);
            Field next(q.spec, Space::Physical);
            for (std::size_t idx = 0; idx < next.data.size(); ++idx)
                next.data[idx] = q.data[idx] * rv.data[idx];
            v = std::move(next);
            const cplx qj = detail::weighted_phase_sum(
                v, Vec2{rec.k * rec.theta.x, rec.k * rec.theta.y});
            sink(ridx, j, qj);
        }
    });
}

} // namespace detail

/// Spectrum of the degree-(j+1) Born-series term Q_j(q); omitted bins stay 0.
inline Field q_hat_operator(const Field& q, int j, const ScatteringDataSet& d,
                            SymbolCache& cache, double rho = 0.0, int threads = 0) {
    if (j < 1) throw std::invalid_argument("q_hat_operator: j must be >= 1");
    Field out(d.inverse_spec, Space::Frequency);
    detail::q_hat_sweep(q, j, d, cache, rho, threads,
                        [&](std::size_t ridx, int jj, cplx value) {
                            if (jj == j) {
                                const ScatterRecord& rec = d.records[ridx];
                                out.at(rec.i, rec.j) = value;
                            }
                        });
    return out;
}

/// Fused sum_{j=1..m} Q_j(q) in one sweep, reusing the resolvent chain.
inline Field q_hat_sum(const Field& q, int m, const ScatteringDataSet& d,
                       SymbolCache& cache, double rho = 0.0, int threads = 0) {
    if (m < 1) throw std::invalid_argument("q_hat_sum: m must be >= 1");
    Field out(d.inverse_spec, Space::Frequency);
    detail::q_hat_sweep(q, m, d, cache, rho, threads,
                        [&](std::size_t ridx, int, cplx value) {
                            const ScatterRecord& rec = d.records[ridx];
                            out.at(rec.i, rec.j) += value;
                        });
    return out;
}

/// One application of the cutoff-modified map:
/// T_m(q) = phi . (q_born - to_phys(sum_j Q_j(q))).
inline Field apply_T_m(const Field& q, const Field& born, const RecoveryParams& params,
                       const ScatteringDataSet& d, SymbolCache& cache) {
    const Field qsum = q_hat_sum(q, params.m, d, cache, params.rho, params.threads);
    const Field correction = to_phys(qsum);
    Field out(d.inverse_spec, Space::Physical);
    const Field& phi = params.cutoff.raster;
    if (phi.spec != d.inverse_spec)
        throw std::invalid_argument("apply_T_m: cutoff raster not on the inverse grid");
    for (std::size_t idx = 0; idx < out.data.size(); ++idx)
        out.data[idx] = phi.data[idx].real() * (born.data[idx] - correction.data[idx]);
    return out;
}

/// Fixed-point recovery q_{m,1} = 0, q_{m,l+1} = T_m(q_{m,l}).
inline RecoveryTrace recover(const ScatteringDataSet& d, RecoveryParams params) {
    if (params.m < 1 || params.l_max < 1)
        throw std::invalid_argument("recover: m and l_max must be >= 1");
    if (params.cutoff.raster.data.empty()) params.cutoff = make_cutoff(d.inverse_spec);
    SymbolCache cache;
    const Field born = born_from_data(d);

    RecoveryTrace trace;
    trace.iterates.reserve(params.l_max);
    trace.iterates.push_back(Field(d.inverse_spec, Space::Physical));   // q_{m,1} = 0
    trace.imag_norms.push_back(0.0);
    trace.iter_seconds.push_back(0.0);

    for (int l = 1; l < params.l_max; ++l) {
        const auto start = std::chrono::steady_clock::now();
        Field next = apply_T_m(trace.iterates.back(), born, params, d, cache);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        const Field& prev = trace.iterates.back();
        double diff2 = 0.0, imag2 = 0.0, next2 = 0.0;
        for (std::size_t idx = 0; idx < next.data.size(); ++idx) {
            diff2 += std::norm(next.data[idx] - prev.data[idx]);
            imag2 += next.data[idx].imag() * next.data[idx].imag();
            next2 += std::norm(next.data[idx]);
        }
        const double h = d.inverse_spec.spacing();
        trace.cauchy_norms.push_back(h * std::sqrt(diff2));
        trace.imag_norms.push_back(h * std::sqrt(imag2));
        trace.iter_seconds.push_back(elapsed.count());
        trace.iterates.push_back(std::move(next));

        if (params.stop_tol > 0.0 && next2 > 0.0 &&
            std::sqrt(diff2 / next2) < params.stop_tol)
            break;
    }
    return trace;
}

/// Baseline iteration that re-solves the Lippmann-Schwinger equation at every
/// recorded frequency in every step:
///   q_1 = phi q_born,
///   q_{n+1} = phi . invFT[ u_inf(xi) - h^2 sum_y e^{-i k theta.y} q_n u_s^n ],
/// with u_s^n the scattered field of potential q_n at (k(xi), sign theta0).
inline RecoveryTrace bcr_recover(const ScatteringDataSet& d, int iterations, double tol,
                                 RecoveryParams params) {
    if (iterations < 1) throw std::invalid_argument("bcr_recover: iterations must be >= 1");
    if (params.cutoff.raster.data.empty()) params.cutoff = make_cutoff(d.inverse_spec);
    SymbolCache cache;
    const Field born = born_from_data(d);
    const Field& phi = params.cutoff.raster;
    if (phi.spec != d.inverse_spec)
        throw std::invalid_argument("bcr_recover: cutoff raster not on the inverse grid");
    const double rho_eff = params.rho > 0.0 ? params.rho : d.inverse_spec.half_width;
    const double h = d.inverse_spec.spacing();

    RecoveryTrace trace;
    auto push_iterate = [&](Field f, double seconds) {
        double imag2 = 0.0;
        for (const cplx& z : f.data) imag2 += z.imag() * z.imag();
        trace.imag_norms.push_back(h * std::sqrt(imag2));
        trace.iter_seconds.push_back(seconds);
        if (!trace.iterates.empty()) {
            double diff2 = 0.0;
            const Field& prev = trace.iterates.back();
            for (std::size_t idx = 0; idx < f.data.size(); ++idx)
                diff2 += std::norm(f.data[idx] - prev.data[idx]);
            trace.cauchy_norms.push_back(h * std::sqrt(diff2));
        }
        trace.iterates.push_back(std::move(f));
    };

    {
        Field q1(d.inverse_spec, Space::Physical);
        for (std::size_t idx = 0; idx < q1.data.size(); ++idx)
            q1.data[idx] = phi.data[idx].real() * born.data[idx];
        push_iterate(std::move(q1), 0.0);
    }

    for (int it = 1; it < iterations; ++it) {
        const auto start = std::chrono::steady_clock::now();
        const Field& q_n = trace.iterates.back();

        Field fhat(d.inverse_spec, Space::Frequency);
        for (const OmittedBin& o : d.omitted) fhat.at(o.i, o.j) = o.u_born;

        std::vector<cplx> corrected(d.records.size(), cplx{0.0, 0.0});
        std::vector<char> failed(d.records.size(), 0);
        parallel_for(d.records.size(), params.threads, [&](std::size_t ridx) {
            const ScatterRecord& rec = d.records[ridx];
            const Vec2 theta_inc{rec.sign * d.theta0.x, rec.sign * d.theta0.y};
            try {
                const auto sigma = cache.get(d.inverse_spec, rec.k, rho_eff);
                const LsSolution sol =
                    solve_lippmann_schwinger(q_n, rec.k, theta_inc, tol, *sigma);
                Field qu(d.inverse_spec, Space::Physical);
                for (std::size_t idx = 0; idx < qu.data.size(); ++idx)
                    qu.data[idx] = q_n.data[idx] * sol.u_s.data[idx];
                const cplx corr = detail::weighted_phase_sum(
                    qu, Vec2{rec.k * rec.theta.x, rec.k * rec.theta.y});
                corrected[ridx] = rec.u_inf - corr;
            } catch (const SolverFailure&) {
                failed[ridx] = 1;   // bin contributes 0, like an omitted one
            }
        });
        for (std::size_t ridx = 0; ridx < d.records.size(); ++ridx) {
            if (failed[ridx]) {
                ++trace.solver_failures;
                continue;
            }
            const ScatterRecord& rec = d.records[ridx];
            fhat.at(rec.i, rec.j) = corrected[ridx];
        }

        Field next = to_phys(fhat);
        for (std::size_t idx = 0; idx < next.data.size(); ++idx)
            next.data[idx] *= phi.data[idx].real();
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        push_iterate(std::move(next), elapsed.count());
    }
    return trace;
}

} // namespace scatlab

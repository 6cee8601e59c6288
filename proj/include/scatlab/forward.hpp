// forward.hpp -- the direct problem: Lippmann-Schwinger solves, far-field
// evaluation, and generation of the fixed-angle dataset on the Ewald
// parameterization of the inverse grid.
//
// Data are produced on a mesh fine_factor times finer than the inverse grid.
// Every inverse-grid bin is accounted for: bins with a resolvable (k, theta)
// get a full record u_inf = Born term + scattering correction; bins where the
// correction is out of reach (xi = 0, near-degenerate xi.theta0, k above the
// cap, or a solver failure) are listed in `omitted` together with the
// Born-only value sampled from the fine grid -- the correction vanishes in
// the k -> infinity limit those bins represent, so the Born sample is the
// natural continuation of the measurement.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatlab/ewald.hpp"
#include "scatlab/gmres.hpp"
#include "scatlab/grid.hpp"
#include "scatlab/parallel.hpp"
#include "scatlab/resolvent.hpp"
#include "scatlab/scene.hpp"

namespace scatlab {

struct ScatterRecord {
    int i = 0, j = 0;        // inverse-grid frequency index
    Vec2 xi;
    double k = 0.0;
    Vec2 theta;
    int sign = +1;
    cplx u_inf{0.0, 0.0};
};

struct OmittedBin {
    int i = 0, j = 0;
    std::string reason;      // "degenerate" | "capped" | "solver"
    cplx u_born{0.0, 0.0};   // fine-grid Born sample at this bin
};

struct ScatteringDataSet {
    GridSpec inverse_spec;
    Vec2 theta0{0.0, 1.0};
    int fine_factor = 2;
    double k_max = 0.0;
    double eps_deg = 0.0;
    double tol = 1e-8;
    std::string potential_id;
    bool inverse_crime = false;
    std::vector<ScatterRecord> records;   // sorted by (i, j)
    std::vector<OmittedBin> omitted;      // sorted by (i, j)
};

struct SolverFailure : std::runtime_error {
    double residual;
    int iterations;
    SolverFailure(const std::string& what, double res, int iters)
        : std::runtime_error(what), residual(res), iterations(iters) {}
};

struct LsOptions {
    int max_iterations = 200;
    int restart = 50;
    bool neumann = false;   // plain Born/Neumann iteration instead of GMRES
};

struct LsSolution {
    Field u_s;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

// sum_y e^{-i p.y} w(y) h^2 using the separable phase structure of the grid.
inline cplx weighted_phase_sum(const Field& w, Vec2 p) {
    const int n = w.spec.n;
    const double h = w.spec.spacing();
    std::vector<cplx> ax(n), ay(n);
    for (int i = 0; i < n; ++i) {
        const double x = -w.spec.half_width + i * h;
        ax[i] = std::polar(1.0, -p.x * x);
        ay[i] = std::polar(1.0, -p.y * x);
    }
    cplx acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        cplx row{0.0, 0.0};
        const cplx* base = &w.data[static_cast<std::size_t>(i) * n];
        for (int j = 0; j < n; ++j) row += ay[j] * base[j];
        acc += ax[i] * row;
    }
    return h * h * acc;
}

// f(x) * e^{i k theta.x}
inline Field times_plane_wave(const Field& f, double k, Vec2 theta) {
    const int n = f.spec.n;
    const double h = f.spec.spacing();
    std::vector<cplx> ax(n), ay(n);
    for (int i = 0; i < n; ++i) {
        const double x = -f.spec.half_width + i * h;
        ax[i] = std::polar(1.0, k * theta.x * x);
        ay[i] = std::polar(1.0, k * theta.y * x);
    }
    Field out(f.spec, Space::Physical);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.at(i, j) = f.at(i, j) * ax[i] * ay[j];
    return out;
}

} // namespace detail

/// Solves u_s = R_k(q u_i) + R_k(q u_s) for the scattered field, with
/// u_i = e^{i k theta_inc . x}. Throws SolverFailure on non-convergence.
inline LsSolution solve_lippmann_schwinger(const Field& q, double k, Vec2 theta_inc,
                                           double tol, const ResolventSymbol& sigma,
                                           const LsOptions& opts = {}) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_lippmann_schwinger: tol must be > 0");
    if (q.spec != sigma.spec)
        throw std::invalid_argument("solve_lippmann_schwinger: grid mismatch");

    const Field qu_i = detail::times_plane_wave(q, k, theta_inc);
    const Field rhs = apply_resolvent(sigma, qu_i);

    auto apply_op = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        Field v(q.spec, Space::Physical);
        for (std::size_t idx = 0; idx < in.size(); ++idx) v.data[idx] = q.data[idx] * in[idx];
        const Field rv = apply_resolvent(sigma, v);
        out.resize(in.size());
        for (std::size_t idx = 0; idx < in.size(); ++idx) out[idx] = in[idx] - rv.data[idx];
    };

    LsSolution sol;
    sol.u_s = Field(q.spec, Space::Physical);

    if (opts.neumann) {
        // u <- rhs + R_k(q u); cheap fallback, converges only for small q
        const double bnorm = detail::norm_c(rhs.data);
        if (bnorm == 0.0) return sol;
        Field u = rhs;
        double resid = 1.0;
        int it = 0;
        for (; it < opts.max_iterations; ++it) {
            Field qu(q.spec, Space::Physical);
            for (std::size_t idx = 0; idx < u.data.size(); ++idx)
                qu.data[idx] = q.data[idx] * u.data[idx];
            Field next = apply_resolvent(sigma, qu);
            double diff = 0.0;
            for (std::size_t idx = 0; idx < u.data.size(); ++idx) {
                next.data[idx] += rhs.data[idx];
                diff += std::norm(next.data[idx] - u.data[idx]);
            }
            u = std::move(next);
            resid = std::sqrt(diff) / bnorm;
            if (resid <= tol) break;
        }
        if (resid > tol)
            throw SolverFailure("Lippmann-Schwinger Neumann iteration did not converge; "
                                "residual " + std::to_string(resid), resid, it);
        sol.u_s = std::move(u);
        sol.residual = resid;
        sol.iterations = it;
        return sol;
    }

    GmresResult res = gmres(apply_op, rhs.data, tol, opts.max_iterations, opts.restart);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "Lippmann-Schwinger solve did not converge in " << res.iterations
            << " iterations; final relative residual " << res.relative_residual;
        throw SolverFailure(msg.str(), res.relative_residual, res.iterations);
    }
    sol.u_s.data = std::move(res.x);
    sol.residual = res.relative_residual;
    sol.iterations = res.iterations;
    return sol;
}

/// Far-field value u_inf(theta, theta_inc, k): Born term plus scattered
/// correction, both as h^2-weighted quadratures over the grid.
inline cplx far_field(const Field& q, const Field& u_s, double k, Vec2 theta, Vec2 theta_inc) {
    const Vec2 xi{k * (theta.x - theta_inc.x), k * (theta.y - theta_inc.y)};
    const cplx born = detail::weighted_phase_sum(q, xi);
    Field qu(q.spec, Space::Physical);
    for (std::size_t idx = 0; idx < q.data.size(); ++idx)
        qu.data[idx] = q.data[idx] * u_s.data[idx];
    const cplx corr = detail::weighted_phase_sum(qu, Vec2{k * theta.x, k * theta.y});
    return born + corr;
}

struct DatasetOptions {
    double eps_deg = 0.0;   // <= 0: half a frequency cell, 0.5 pi/L
    double rho = 0.0;       // <= 0: L
    int threads = 0;        // <= 0: hardware concurrency
    LsOptions solver;
};

/// Simulates the fixed-angle dataset for potential p on the inverse grid,
/// solving the direct problem on a fine_factor-times finer mesh.
inline ScatteringDataSet generate_dataset(const PotentialSpec& p, const GridSpec& inverse_spec,
                                          Vec2 theta0, int fine_factor, double k_max,
                                          double tol, const DatasetOptions& opts = {}) {
    if (fine_factor < 1) throw std::invalid_argument("generate_dataset: fine_factor must be >= 1");
    const double t0n = norm(theta0);
    if (!(t0n > 0.0)) throw std::invalid_argument("generate_dataset: theta0 must be nonzero");
    theta0 = {theta0.x / t0n, theta0.y / t0n};

    const int n = inverse_spec.n;
    const double L = inverse_spec.half_width;
    ScatteringDataSet d;
    d.inverse_spec = inverse_spec;
    d.theta0 = theta0;
    d.fine_factor = fine_factor;
    d.k_max = k_max > 0.0 ? k_max : M_PI * n / (2.0 * L);
    d.eps_deg = opts.eps_deg > 0.0 ? opts.eps_deg : 0.5 * M_PI / L;
    d.tol = tol;
    d.potential_id = p.id();
    d.inverse_crime = (fine_factor == 1);

    const GridSpec fine = make_grid(n * fine_factor, L);
    const double rho = opts.rho > 0.0 ? opts.rho : L;
    const Field q_fine = rasterize(p, fine);
    const Field q_hat_fine = to_freq(q_fine);

    auto born_sample = [&](int i, int j) {
        // same physical frequency lives at the fine-grid bin with equal wrap
        const int wi = wrap_index(i, n);
        const int wj = wrap_index(j, n);
        const int fi = wi >= 0 ? wi : wi + fine.n;
        const int fj = wj >= 0 ? wj : wj + fine.n;
        return q_hat_fine.at(fi, fj);
    };

    struct BinPlan {
        int i, j;
        std::optional<EwaldPoint> point;  // empty: degenerate
        bool capped = false;
    };
    std::vector<BinPlan> plan;
    plan.reserve(inverse_spec.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            BinPlan b{i, j, std::nullopt, false};
            const Vec2 xi = grid_freq(inverse_spec, i, j);
            try {
                EwaldPoint e = ewald_map(xi, theta0, d.eps_deg);
                if (e.k > d.k_max)
                    b.capped = true;
                else
                    b.point = e;
            } catch (const DegenerateFrequency&) {
            }
            plan.push_back(b);
        }

    std::vector<std::optional<ScatterRecord>> slots(plan.size());
    std::vector<std::optional<OmittedBin>> omitted_slots(plan.size());

    parallel_for(plan.size(), opts.threads, [&](std::size_t idx) {
        const BinPlan& b = plan[idx];
        const Vec2 xi = grid_freq(inverse_spec, b.i, b.j);
        if (!b.point) {
            omitted_slots[idx] = OmittedBin{b.i, b.j, b.capped ? "capped" : "degenerate",
                                            born_sample(b.i, b.j)};
            return;
        }
        const EwaldPoint& e = *b.point;
        const Vec2 theta_inc{e.sign * theta0.x, e.sign * theta0.y};
        try {
            const ResolventSymbol sigma = kernel_symbol(fine, e.k, rho);
            const LsSolution sol =
                solve_lippmann_schwinger(q_fine, e.k, theta_inc, tol, sigma, opts.solver);
            ScatterRecord rec;
            rec.i = b.i;
            rec.j = b.j;
            rec.xi = xi;
            rec.k = e.k;
            rec.theta = e.theta;
            rec.sign = e.sign;
            rec.u_inf = far_field(q_fine, sol.u_s, e.k, e.theta, theta_inc);
            slots[idx] = rec;
        } catch (const SolverFailure&) {
            omitted_slots[idx] = OmittedBin{b.i, b.j, "solver", born_sample(b.i, b.j)};
        }
    });

    for (std::size_t idx = 0; idx < plan.size(); ++idx) {
        if (slots[idx]) d.records.push_back(*slots[idx]);
        if (omitted_slots[idx]) d.omitted.push_back(*omitted_slots[idx]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Dataset files: <name>.csv with one row per record, plus a sidecar
// <name>.manifest.json with the generation parameters and the omitted bins.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string manifest_path(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return csv_path.substr(0, csv_path.size() - suffix.size()) + ".manifest.json";
    return csv_path + ".manifest.json";
}

} // namespace detail

inline void write_dataset(const ScatteringDataSet& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
    out << "i,j,xi1,xi2,k,theta1,theta2,sign,uinf_re,uinf_im\n";
    for (const ScatterRecord& r : d.records) {
        out << r.i << ',' << r.j << ','
            << detail::format_g17(r.xi.x) << ',' << detail::format_g17(r.xi.y) << ','
            << detail::format_g17(r.k) << ','
            << detail::format_g17(r.theta.x) << ',' << detail::format_g17(r.theta.y) << ','
            << r.sign << ','
            << detail::format_g17(r.u_inf.real()) << ',' << detail::format_g17(r.u_inf.imag())
            << '\n';
    }
    if (!out) throw std::runtime_error("write_dataset: write failed for " + path);

    nlohmann::json manifest;
    manifest["n"] = d.inverse_spec.n;
    manifest["L"] = d.inverse_spec.half_width;
    manifest["theta0"] = {d.theta0.x, d.theta0.y};
    manifest["fine_factor"] = d.fine_factor;
    manifest["k_max"] = d.k_max;
    manifest["eps_deg"] = d.eps_deg;
    manifest["potential_id"] = d.potential_id;
    manifest["tol"] = d.tol;
    manifest["inverse_crime"] = d.inverse_crime;
    nlohmann::json omitted = nlohmann::json::array();
    for (const OmittedBin& o : d.omitted)
        omitted.push_back({{"i", o.i},
                           {"j", o.j},
                           {"reason", o.reason},
                           {"uinf_re", o.u_born.real()},
                           {"uinf_im", o.u_born.imag()}});
    manifest["omitted"] = std::move(omitted);

    std::ofstream mout(detail::manifest_path(path));
    if (!mout) throw std::runtime_error("write_dataset: cannot open manifest for " + path);
    mout << manifest.dump(2) << '\n';
    if (!mout) throw std::runtime_error("write_dataset: manifest write failed for " + path);
}

inline ScatteringDataSet read_dataset(const std::string& path) {
    std::ifstream min(detail::manifest_path(path));
    if (!min)
        throw std::runtime_error("read_dataset: missing manifest " + detail::manifest_path(path));
    nlohmann::json manifest;
    try {
        min >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_dataset: malformed manifest: " + std::string(e.what()));
    }

    ScatteringDataSet d;
    try {
        d.inverse_spec = make_grid(manifest.at("n").get<int>(), manifest.at("L").get<double>());
        d.theta0 = {manifest.at("theta0").at(0).get<double>(),
                    manifest.at("theta0").at(1).get<double>()};
        d.fine_factor = manifest.at("fine_factor").get<int>();
        d.k_max = manifest.at("k_max").get<double>();
        d.eps_deg = manifest.at("eps_deg").get<double>();
        d.potential_id = manifest.at("potential_id").get<std::string>();
        d.tol = manifest.at("tol").get<double>();
        d.inverse_crime = manifest.at("inverse_crime").get<bool>();
        for (const auto& o : manifest.at("omitted")) {
            OmittedBin bin;
            bin.i = o.at("i").get<int>();
            bin.j = o.at("j").get<int>();
            bin.reason = o.at("reason").get<std::string>();
            bin.u_born = cplx{o.value("uinf_re", 0.0), o.value("uinf_im", 0.0)};
            d.omitted.push_back(bin);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_dataset: manifest missing fields: " + std::string(e.what()));
    }

    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("i,j,xi1,xi2,k,theta1,theta2,sign,uinf_re,uinf_im", 0) != 0)
        throw std::runtime_error("read_dataset: bad header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ScatterRecord r;
        double re = 0.0, im = 0.0;
        char c;
        std::istringstream ss(line);
        if (!(ss >> r.i >> c >> r.j >> c >> r.xi.x >> c >> r.xi.y >> c >> r.k >> c
                 >> r.theta.x >> c >> r.theta.y >> c >> r.sign >> c >> re >> c >> im))
            throw std::runtime_error("read_dataset: malformed row in " + path);
        r.u_inf = cplx{re, im};
        d.records.push_back(r);
    }

    // coverage check: every inverse-grid index exactly once
    const int n = d.inverse_spec.n;
    std::vector<char> seen(d.inverse_spec.size(), 0);
    auto mark = [&](int i, int j) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw std::runtime_error("read_dataset: index out of range");
        char& flag = seen[static_cast<std::size_t>(i) * n + j];
        if (flag) throw std::runtime_error("read_dataset: duplicate index (" + std::to_string(i) +
                                           "," + std::to_string(j) + ")");
        flag = 1;
    };
    for (const auto& r : d.records) mark(r.i, r.j);
    for (const auto& o : d.omitted) mark(o.i, o.j);
    for (char flag : seen)
        if (!flag) throw std::runtime_error("read_dataset: records and omitted bins do not cover the grid");
    return d;
}

} // namespace scatlab

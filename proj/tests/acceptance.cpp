// acceptance: end-to-end checks of the laboratory against its quantitative
// targets. Prints one PASS/FAIL line per criterion and exits with the number
// of failures. The full-resolution tier (n = 128 data, the absolute error
// bands) is opt-in via --paper since it regenerates large datasets.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "scatlab/forward.hpp"
#include "scatlab/inversion.hpp"
#include "scatlab/lab.hpp"

using namespace scatlab;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void report_skip(int criterion, const std::string& what, const std::string& why) {
    std::printf("[SKIP] criterion %2d: %s (%s)\n", criterion, what.c_str(), why.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.cache_dir = "acceptance_cache";
    return cfg;
}

double gauss_bump(double x1, double x2, double width) {
    return std::exp(-(x1 * x1 + x2 * x2) / (width * width));
}

Field rasterize_fn(const GridSpec& g, const std::function<double(double, double)>& f) {
    Field out(g, Space::Physical);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const Vec2 x = grid_point(g, i, j);
            out.at(i, j) = cplx{f(x.x, x.y), 0.0};
        }
    return out;
}

// --- independent dense-quadrature convolution oracle -------------------------

cplx oracle_kernel(double k, double rho, double r) {
    if (r > rho || r == 0.0) return {0.0, 0.0};
    return cplx{0.0, -0.25} * hankel1(0, k * r);
}

cplx oracle_convolve(const std::function<double(double, double)>& f, double k, double rho,
                     double L, int n_q, double x1, double x2) {
    const double h = 2.0 * L / n_q;
    const double a = h / std::sqrt(M_PI);
    const cplx disc = cplx{0.0, -M_PI / 2.0} *
                      (a * hankel1(1, k * a) / k + cplx{0.0, 2.0 / (M_PI * k * k)});
    cplx acc{0.0, 0.0};
    for (int i = 0; i < n_q; ++i) {
        const double y1 = -L + i * h;
        for (int j = 0; j < n_q; ++j) {
            const double y2 = -L + j * h;
            const double fy = f(y1, y2);
            if (fy == 0.0) continue;
            const double r = std::hypot(x1 - y1, x2 - y2);
            acc += r < 0.5 * h ? fy * disc / (h * h) : fy * oracle_kernel(k, rho, r);
        }
    }
    return acc * (h * h);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::map<std::pair<int, int>, double> error_table(const std::vector<ReportRow>& rows) {
    std::map<std::pair<int, int>, double> t;
    for (const auto& r : rows)
        if (r.algorithm == "new") t[{r.m, r.l}] = r.l2_error;
    return t;
}

} // namespace

int main(int argc, char** argv) {
    bool paper_tier = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--paper") == 0) paper_tier = true;

    const auto t_start = std::chrono::steady_clock::now();

    // 1 -- resolvent against the dense quadrature oracle
    {
        const auto t0 = std::chrono::steady_clock::now();
        const GridSpec g = make_grid(32);
        const double rho = g.half_width;
        auto f = [](double a, double b) { return gauss_bump(a, b, 0.3); };
        const Field fr = rasterize_fn(g, f);
        double worst = 0.0;
        for (double k : {1.0, 2.0, 5.0}) {
            const Field u = apply_resolvent(kernel_symbol(g, k, rho), fr);
            double max_ref = 0.0, max_err = 0.0;
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j) {
                    const Vec2 x = grid_point(g, i, j);
                    if (std::hypot(x.x, x.y) > 1.4) continue;
                    const cplx ref = oracle_convolve(f, k, rho, g.half_width, 256, x.x, x.y);
                    max_ref = std::max(max_ref, std::abs(ref));
                    max_err = std::max(max_err, std::abs(u.at(i, j) - ref));
                }
            worst = std::max(worst, max_err / max_ref);
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(1, worst <= 1e-3 && seconds < 60.0,
               "FFT-symbol resolvent matches dense-quadrature convolution (k = 1, 2, 5)",
               fmt("max rel err %.2e vs 1e-3, %.0fs", worst, seconds));
    }

    // 2 -- two-grid Helmholtz residual order
    {
        const double k = 2.0, rho = 2.1;
        auto f = [](double a, double b) { return gauss_bump(a, b, 0.4); };
        auto residual = [&](int n) {
            const GridSpec g = make_grid(n);
            const Field fr = rasterize_fn(g, f);
            const Field u = apply_resolvent(kernel_symbol(g, k, rho), fr);
            const double h = g.spacing();
            double worst = 0.0;
            for (int i = 1; i < n - 1; ++i)
                for (int j = 1; j < n - 1; ++j) {
                    const Vec2 x = grid_point(g, i, j);
                    if (std::hypot(x.x, x.y) > 1.0) continue;
                    const cplx lap = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) +
                                      u.at(i, j - 1) - 4.0 * u.at(i, j)) / (h * h);
                    worst = std::max(worst, std::abs(lap + k * k * u.at(i, j) - fr.at(i, j)));
                }
            return worst;
        };
        const double r32 = residual(32), r64 = residual(64);
        const double order = std::log2(r32 / r64);
        report(2, order >= 1.8, "Helmholtz finite-difference residual order (n = 32 -> 64)",
               fmt("order %.2f vs 1.8", order));
    }

    ExperimentConfig cfg = base_config();

    // 3 -- homogeneity of the Born-series terms
    {
        const auto p = PotentialSpec::scaled(PotentialSpec::example2(), 0.5);
        const ScatteringDataSet d = ensure_dataset(p, 32, cfg);
        const Field q = rasterize(p, d.inverse_spec);
        SymbolCache cache;
        double worst = 0.0;
        for (double lambda : {2.0, -0.5}) {
            Field ql(d.inverse_spec, Space::Physical);
            for (std::size_t i = 0; i < q.data.size(); ++i) ql.data[i] = lambda * q.data[i];
            for (int j = 1; j <= 3; ++j) {
                const Field a = q_hat_operator(ql, j, d, cache);
                const Field b = q_hat_operator(q, j, d, cache);
                const double scale = std::pow(lambda, j + 1);
                for (std::size_t i = 0; i < a.data.size(); ++i) {
                    const double mag = std::abs(a.data[i]);
                    if (mag > 0.0)
                        worst = std::max(worst, std::abs(a.data[i] - scale * b.data[i]) / mag);
                }
            }
        }
        report(3, worst <= 1e-12, "Q_j homogeneity of degree j+1 (j <= 3, lambda = 2, -1/2)",
               fmt("max rel dev %.2e vs 1e-12", worst));
    }

    // 4 -- second iterate is exactly the cutoff Born approximation
    {
        const auto p = PotentialSpec::example1();
        const ScatteringDataSet d = ensure_dataset(p, 32, cfg);
        RecoveryParams params;
        params.m = 3;
        params.l_max = 3;
        params.cutoff = make_cutoff(d.inverse_spec);
        const RecoveryTrace tr = recover(d, params);
        const Field born = born_from_data(d);
        bool exact = true;
        for (int i = 0; i < d.inverse_spec.n && exact; ++i)
            for (int j = 0; j < d.inverse_spec.n; ++j) {
                const cplx expected = params.cutoff.raster.at(i, j).real() * born.at(i, j);
                if (tr.iterates[1].at(i, j) != expected) {
                    exact = false;
                    break;
                }
            }
        report(4, exact, "q_{m,2} equals phi q_born exactly",
               exact ? "bitwise equal" : "mismatch");
    }

    // 5 -- stabilization pattern of the example-1 error curves
    std::vector<ReportRow> ex1_rows;
    {
        ex1_rows = run_experiment(1, {32}, {1, 2, 3, 4}, 6, cfg);
        const auto err = error_table(ex1_rows);
        // the m = 1 curve attains its lowest error at l = 3: the minimum sits
        // there and iterating further improves nothing beyond the 2% band
        // (the curve is allowed to rebound above its minimum)
        int argmin = 2;
        for (int l = 3; l <= 6; ++l)
            if (err.at({1, l}) < err.at({1, argmin})) argmin = l;
        const double m1_gain = (err.at({1, 3}) - err.at({1, 6})) / err.at({1, 6});
        const bool m1_ok = argmin == 3 && m1_gain <= 0.02;
        double stab = 0.0;
        for (int m : {2, 3, 4})
            stab = std::max(stab, std::abs(err.at({m, 4}) - err.at({m, 6})) / err.at({m, 6}));
        double global_min = 1e300;
        for (const auto& [key, e] : err)
            if (key.second >= 2) global_min = std::min(global_min, e);
        const double near_min = err.at({2, 3}) / global_min;
        const bool pass = m1_ok && stab < 0.05 && near_min <= 1.15;
        report(5, pass, "example 1 stabilization: m=1 settles by l=3, m>=2 by l=4, (2,3) near min",
               fmt("m1 min at l=%d, gain beyond l=3 %.1f%% vs 2%%, m>=2 drift %.2f%% vs 5%%, "
                   "(2,3)/min %.3f vs 1.15",
                   argmin, 100.0 * m1_gain, 100.0 * stab, near_min));
    }

    // 6 -- mesh convergence of q_{4,7} for example 1
    {
        std::vector<int> meshes = {32, 64};
        if (paper_tier) meshes.push_back(128);
        std::vector<double> errs;
        for (int n : meshes) {
            const auto rows = run_experiment(1, {n}, {4}, 7, cfg);
            errs.push_back(error_table(rows).at({4, 7}));
        }
        bool decreasing = true;
        std::string detail;
        for (std::size_t i = 0; i < errs.size(); ++i) {
            if (i > 0 && errs[i] >= errs[i - 1]) decreasing = false;
            detail += fmt("%s%.4f@%d", i ? ", " : "", errs[i], meshes[i]);
        }
        report(6, decreasing, "example 1 error of q_{4,7} strictly decreases with the mesh",
               detail);
    }

    // 7 -- absolute error bands at n = 128 (opt-in)
    if (!paper_tier) {
        report_skip(7, "absolute error bands at n = 128", "paper tier; rerun with --paper");
    } else {
        const auto rows1 = run_experiment(1, {128}, {4}, 7, cfg);
        const double log1 = std::log10(error_table(rows1).at({4, 7}));
        const bool pass1 = std::abs(log1 - (-1.8)) <= 0.4;
        const auto rows2 = run_experiment(2, {128}, {4}, 7, cfg);
        const double log2v = std::log10(error_table(rows2).at({4, 7}));
        const bool pass2 = std::abs(log2v - (-4.4)) <= 0.5;
        report(7, pass1 && pass2, "absolute error bands at n = 128 (q_{4,7})",
               fmt("ex1 log10 %.2f vs -1.8+-0.4; ex2 log10 %.2f vs -4.4+-0.5", log1, log2v));
    }

    // 8 -- amplitude-scaling exponent of the converged error
    {
        std::map<std::pair<int, int>, double> errs;   // (m, eps-index)
        const double eps_values[2] = {0.2, 0.1};
        for (int e = 0; e < 2; ++e) {
            const auto p = PotentialSpec::scaled(PotentialSpec::example2(), eps_values[e]);
            const ScatteringDataSet d = ensure_dataset(p, 32, cfg);
            RecoveryParams params;
            params.l_max = 8;
            params.cutoff = make_cutoff(d.inverse_spec);
            for (int m : {1, 2}) {
                params.m = m;
                const RecoveryTrace tr = recover(d, params);
                errs[{m, e}] = l2_error(tr.iterates.back(), p);
            }
        }
        const double expo1 = std::log2(errs.at({1, 0}) / errs.at({1, 1}));
        const double expo2 = std::log2(errs.at({2, 0}) / errs.at({2, 1}));
        report(8, expo1 >= 1.5 && expo2 >= 2.5,
               "error scaling in the amplitude: log2 ratio >= m + 1/2 for m = 1, 2",
               fmt("m=1 exponent %.2f vs 1.5; m=2 exponent %.2f vs 2.5", expo1, expo2));
    }

    // 9 -- contraction of the fixed-point iteration
    {
        const auto p = PotentialSpec::scaled(PotentialSpec::example2(), 0.1);
        const ScatteringDataSet d = ensure_dataset(p, 32, cfg);
        RecoveryParams params;
        params.m = 2;
        params.l_max = 6;
        params.cutoff = make_cutoff(d.inverse_spec);
        const RecoveryTrace tr = recover(d, params);
        double worst_ratio = 0.0;
        for (std::size_t i = 1; i < tr.cauchy_norms.size(); ++i)
            worst_ratio = std::max(worst_ratio, tr.cauchy_norms[i] / tr.cauchy_norms[i - 1]);
        report(9, worst_ratio < 1.0, "Cauchy differences contract for l >= 2 (eps = 0.1, m = 2)",
               fmt("max ratio %.3f vs 1", worst_ratio));
    }

    // 10 -- per-iteration speed against the resolve-every-frequency baseline
    {
        const auto p = PotentialSpec::example1();
        const ScatteringDataSet d = ensure_dataset(p, 64, cfg);
        RecoveryParams params;
        params.m = 2;
        params.l_max = 4;
        params.cutoff = make_cutoff(d.inverse_spec);
        const RecoveryTrace tn = recover(d, params);
        const RecoveryTrace tb = bcr_recover(d, 3, d.tol, params);
        double a = 0.0, b = 0.0;
        for (std::size_t l = 1; l < tn.iter_seconds.size(); ++l) a += tn.iter_seconds[l];
        a /= static_cast<double>(tn.iter_seconds.size() - 1);
        for (std::size_t l = 1; l < tb.iter_seconds.size(); ++l) b += tb.iter_seconds[l];
        b /= static_cast<double>(tb.iter_seconds.size() - 1);
        report(10, 2.0 * a <= b, "fixed-point iteration at least 2x faster per step than the baseline",
               fmt("%.3fs vs %.3fs per iteration (%.1fx)", a, b, b / std::max(a, 1e-12)));
    }

    // 11 -- file round trips and byte-identical reruns
    {
        const auto p = PotentialSpec::example2();
        const ScatteringDataSet d = ensure_dataset(p, 32, cfg);
        write_dataset(d, "acceptance_rt.csv");
        const ScatteringDataSet back = read_dataset("acceptance_rt.csv");
        write_dataset(back, "acceptance_rt2.csv");
        const bool files_equal =
            slurp("acceptance_rt.csv") == slurp("acceptance_rt2.csv") &&
            slurp(detail::manifest_path("acceptance_rt.csv")) ==
                slurp(detail::manifest_path("acceptance_rt2.csv"));

        const auto rows_again = run_experiment(1, {32}, {1, 2, 3, 4}, 6, cfg);
        write_report(ex1_rows, "acceptance_rep1.csv");
        write_report(rows_again, "acceptance_rep2.csv");
        const bool reports_equal = slurp("acceptance_rep1.csv") == slurp("acceptance_rep2.csv");
        for (const char* f : {"acceptance_rt.csv", "acceptance_rt2.csv", "acceptance_rep1.csv",
                              "acceptance_rep2.csv"}) {
            std::remove(f);
            std::remove(detail::manifest_path(f).c_str());
        }
        report(11, files_equal && reports_equal,
               "dataset round trip bit-exact; experiment reruns byte-identical",
               fmt("dataset %s, report %s", files_equal ? "ok" : "differs",
                   reports_equal ? "ok" : "differs"));
    }

    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::printf("%d criterion failure(s); %.0fs total\n", failures, total);
    return failures;
}

// lab.hpp -- experiment harness: the discrete L2 error metric, the Example
// 1/2 sweeps over (m, l, N), CSV reports, and static SVG error plots.
//
// Datasets are cached under a content hash of their generation parameters so
// the expensive forward sweeps run once; report rows are cached the same way,
// which also makes reruns of an experiment byte-identical (wall-clock columns
// included, since they are reused rather than re-measured).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "scatlab/forward.hpp"
#include "scatlab/inversion.hpp"
#include "scatlab/scene.hpp"

namespace scatlab {

/// Discrete L2 distance between the real part of a recovered field and the
/// grid projection of the true potential.
inline double l2_error(const Field& approx, const PotentialSpec& truth) {
    const Field t = rasterize(truth, approx.spec);
    double acc = 0.0;
    for (std::size_t idx = 0; idx < approx.data.size(); ++idx) {
        const double diff = approx.data[idx].real() - t.data[idx].real();
        acc += diff * diff;
    }
    return approx.spec.spacing() * std::sqrt(acc);
}

struct ReportRow {
    int example = 1;
    std::string algorithm = "new";   // "new" | "bcr" | "born"
    int n = 0;
    int m = 0;
    int l = 0;
    double l2_error = 0.0;
    double log10_error = 0.0;
    double wall_seconds = 0.0;
};

struct ExperimentConfig {
    Vec2 theta0{0.0, 1.0};
    int fine_factor = 2;
    double k_max = 0.0;      // <= 0: inverse-grid radial Nyquist pi n/(2L)
    double eps_deg = 0.0;    // <= 0: half a frequency cell
    double tol = 1e-8;
    double half_width = 2.1;
    double r_inner = 1.9;
    double r_outer = 2.08;
    double stop_tol = 0.0;
    std::vector<std::string> algorithms{"new"};
    std::string cache_dir = "cache";
    int threads = 0;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string dataset_key(const std::string& potential_id, int n,
                               const ExperimentConfig& cfg) {
    std::ostringstream ss;
    ss << potential_id << "|n=" << n << "|L=" << format_g17(cfg.half_width)
       << "|theta0=" << format_g17(cfg.theta0.x) << ',' << format_g17(cfg.theta0.y)
       << "|fine=" << cfg.fine_factor << "|kmax=" << format_g17(cfg.k_max)
       << "|eps=" << format_g17(cfg.eps_deg) << "|tol=" << format_g17(cfg.tol);
    return ss.str();
}

} // namespace detail

inline void write_report(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report: cannot open " + path);
    out << "example,algorithm,n,m,l,l2_error,log10_error,wall_seconds\n";
    for (const ReportRow& r : rows)
        out << r.example << ',' << r.algorithm << ',' << r.n << ',' << r.m << ',' << r.l << ','
            << detail::format_g17(r.l2_error) << ',' << detail::format_g17(r.log10_error) << ','
            << detail::format_g17(r.wall_seconds) << '\n';
    if (!out) throw std::runtime_error("write_report: write failed for " + path);
}

inline std::vector<ReportRow> read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("example,algorithm,n,m,l,l2_error,log10_error,wall_seconds", 0) != 0)
        throw std::runtime_error("read_report: bad header in " + path);
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) parts.push_back(token);
        if (parts.size() != 8) throw std::runtime_error("read_report: malformed row in " + path);
        ReportRow r;
        r.example = std::stoi(parts[0]);
        r.algorithm = parts[1];
        r.n = std::stoi(parts[2]);
        r.m = std::stoi(parts[3]);
        r.l = std::stoi(parts[4]);
        r.l2_error = std::strtod(parts[5].c_str(), nullptr);
        r.log10_error = std::strtod(parts[6].c_str(), nullptr);
        r.wall_seconds = std::strtod(parts[7].c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

/// Loads the dataset for (potential, n) from the cache directory, generating
/// and storing it on a miss.
inline ScatteringDataSet ensure_dataset(const PotentialSpec& p, int n,
                                        const ExperimentConfig& cfg) {
    const GridSpec spec = make_grid(n, cfg.half_width);
    const std::string key = detail::dataset_key(p.id(), n, cfg);
    std::filesystem::create_directories(cfg.cache_dir);
    const std::string path = cfg.cache_dir + "/ds_" + detail::hex64(detail::fnv1a(key)) + ".csv";
    if (std::filesystem::exists(path)) {
        try {
            return read_dataset(path);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("ensure_dataset: corrupt cache entry: ") +
                                     e.what() + "; delete '" + path +
                                     "' (and its manifest) and rerun to regenerate");
        }
    }
    DatasetOptions opts;
    opts.eps_deg = cfg.eps_deg;
    opts.threads = cfg.threads;
    ScatteringDataSet d =
        generate_dataset(p, spec, cfg.theta0, cfg.fine_factor, cfg.k_max, cfg.tol, opts);
    write_dataset(d, path);
    return d;
}

namespace detail {

inline PotentialSpec example_potential(int example) {
    if (example == 1) return PotentialSpec::example1();
    if (example == 2) return PotentialSpec::example2();
    throw std::invalid_argument("example must be 1 or 2");
}

inline double safe_log10(double v) {
    return v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Runs the (n, m, l) sweep for one example and returns one row per
/// (n, m, l, algorithm). Results are cached; identical configs return the
/// cached rows byte-for-byte.
inline std::vector<ReportRow> run_experiment(int example, const std::vector<int>& n_list,
                                             const std::vector<int>& m_list, int l_max,
                                             const ExperimentConfig& cfg) {
    if (n_list.empty() || m_list.empty() || l_max < 1)
        throw std::invalid_argument("run_experiment: empty sweep");
    const PotentialSpec truth = detail::example_potential(example);

    std::ostringstream key;
    key << "experiment|example=" << example << "|lmax=" << l_max;
    key << "|n=";
    for (int n : n_list) key << n << ';';
    key << "|m=";
    for (int m : m_list) key << m << ';';
    key << "|alg=";
    for (const auto& a : cfg.algorithms) key << a << ';';
    key << "|cutoff=" << detail::format_g17(cfg.r_inner) << ',' << detail::format_g17(cfg.r_outer)
        << "|stop=" << detail::format_g17(cfg.stop_tol)
        << '|' << detail::dataset_key(truth.id(), 0, cfg);
    std::filesystem::create_directories(cfg.cache_dir);
    const std::string rows_path =
        cfg.cache_dir + "/rows_" + detail::hex64(detail::fnv1a(key.str())) + ".csv";
    if (std::filesystem::exists(rows_path)) {
        try {
            return read_report(rows_path);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("run_experiment: corrupt row cache: ") + e.what() +
                                     "; delete '" + rows_path + "' and rerun to regenerate");
        }
    }

    std::vector<ReportRow> rows;
    for (int n : n_list) {
        const ScatteringDataSet d = ensure_dataset(truth, n, cfg);
        RecoveryParams params;
        params.l_max = l_max;
        params.stop_tol = cfg.stop_tol;
        params.cutoff = make_cutoff(d.inverse_spec, cfg.r_inner, cfg.r_outer);
        params.threads = cfg.threads;

        for (const std::string& alg : cfg.algorithms) {
            if (alg == "new") {
                for (int m : m_list) {
                    params.m = m;
                    const RecoveryTrace trace = recover(d, params);
                    double wall = 0.0;
                    for (std::size_t l = 0; l < trace.iterates.size(); ++l) {
                        wall += trace.iter_seconds[l];
                        ReportRow r;
                        r.example = example;
                        r.algorithm = "new";
                        r.n = n;
                        r.m = m;
                        r.l = static_cast<int>(l) + 1;
                        r.l2_error = l2_error(trace.iterates[l], truth);
                        r.log10_error = detail::safe_log10(r.l2_error);
                        r.wall_seconds = wall;
                        rows.push_back(r);
                    }
                }
            } else if (alg == "bcr") {
                const RecoveryTrace trace = bcr_recover(d, l_max, cfg.tol, params);
                double wall = 0.0;
                for (std::size_t l = 0; l < trace.iterates.size(); ++l) {
                    wall += trace.iter_seconds[l];
                    ReportRow r;
                    r.example = example;
                    r.algorithm = "bcr";
                    r.n = n;
                    r.m = 0;
                    r.l = static_cast<int>(l) + 1;
                    r.l2_error = l2_error(trace.iterates[l], truth);
                    r.log10_error = detail::safe_log10(r.l2_error);
                    r.wall_seconds = wall;
                    rows.push_back(r);
                }
            } else if (alg == "born") {
                const auto start = std::chrono::steady_clock::now();
                const Field born = born_from_data(d);
                Field masked(d.inverse_spec, Space::Physical);
                for (std::size_t idx = 0; idx < masked.data.size(); ++idx)
                    masked.data[idx] =
                        params.cutoff.raster.data[idx].real() * born.data[idx];
                const std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - start;
                ReportRow r;
                r.example = example;
                r.algorithm = "born";
                r.n = n;
                r.m = 0;
                r.l = 1;
                r.l2_error = l2_error(masked, truth);
                r.log10_error = detail::safe_log10(r.l2_error);
                r.wall_seconds = elapsed.count();
                rows.push_back(r);
            } else {
                throw std::invalid_argument("run_experiment: unknown algorithm '" + alg + "'");
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.example, a.algorithm, a.n, a.m, a.l) <
               std::tie(b.example, b.algorithm, b.n, b.m, b.l);
    });
    write_report(rows, rows_path);
    // round-trip through the cache so the returned rows match the file exactly
    return read_report(rows_path);
}

// ---------------------------------------------------------------------------
// SVG error plots: one polyline per series, log10 error on the Y axis,
// l or N on the X axis. Single-point series render as a marker only.
// ---------------------------------------------------------------------------

inline void emit_plot(const std::vector<ReportRow>& rows, const std::string& path,
                      const std::string& x_axis = "l") {
    if (rows.empty()) throw std::invalid_argument("emit_plot: no rows");
    if (x_axis != "l" && x_axis != "n")
        throw std::invalid_argument("emit_plot: x axis must be 'l' or 'n'");

    struct SeriesKey {
        std::string algorithm;
        int a = 0, b = 0;
        bool operator<(const SeriesKey& o) const {
            return std::tie(algorithm, a, b) < std::tie(o.algorithm, o.a, o.b);
        }
    };
    std::map<SeriesKey, std::vector<std::pair<double, double>>> series;
    std::set<double> xs;
    double ymin = 1e300, ymax = -1e300;
    for (const ReportRow& r : rows) {
        if (!std::isfinite(r.log10_error)) continue;
        const double x = x_axis == "l" ? r.l : r.n;
        SeriesKey k;
        k.algorithm = r.algorithm;
        if (x_axis == "l") {
            k.a = r.n;
            k.b = r.m;
        } else {
            k.a = r.m;
            k.b = r.l;
        }
        series[k].push_back({x, r.log10_error});
        xs.insert(x);
        ymin = std::min(ymin, r.log10_error);
        ymax = std::max(ymax, r.log10_error);
    }
    if (series.empty()) throw std::invalid_argument("emit_plot: no finite rows");
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    } else {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }
    const double xmin = *xs.begin();
    const double xmax = *xs.rbegin();
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;

    const double width = 760, height = 520;
    const double ml = 70, mr = 160, mt = 24, mb = 52;
    auto px = [&](double x) { return ml + (x - xmin) / xspan * (width - ml - mr); };
    auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * (height - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_plot: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    out << "  <line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";

    // x ticks at the data values
    for (double x : xs) {
        const double cx = px(x);
        out << "  <line x1=\"" << cx << "\" y1=\"" << height - mb << "\" x2=\"" << cx
            << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << cx << "\" y=\"" << height - mb + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << static_cast<long long>(x)
            << "</text>\n";
    }
    // y ticks
    for (int t = 0; t <= 4; ++t) {
        const double y = ymin + (ymax - ymin) * t / 4.0;
        const double cy = py(y);
        char label[32];
        std::snprintf(label, sizeof(label), "%.3g", y);
        out << "  <line x1=\"" << ml - 5 << "\" y1=\"" << cy << "\" x2=\"" << ml << "\" y2=\""
            << cy << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << ml - 8 << "\" y=\"" << cy + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
    }
    // axis labels
    out << "  <text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"14\" text-anchor=\"middle\">"
        << (x_axis == "l" ? "parameter l" : "parameter N") << "</text>\n";
    out << "  <text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (mt + height - mb) / 2 << ")\">log10 L2 error</text>\n";

    int color_idx = 0;
    double legend_y = mt + 12;
    for (auto& [key, pts] : series) {
        std::sort(pts.begin(), pts.end());
        const char* color = palette[color_idx++ % 8];
        if (pts.size() >= 2) {
            out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
            out << "\"/>\n";
        }
        for (const auto& [x, y] : pts)
            out << "  <circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        std::ostringstream label;
        label << key.algorithm;
        if (x_axis == "l")
            label << " n=" << key.a << " m=" << key.b;
        else
            label << " m=" << key.a << " l=" << key.b;
        out << "  <text x=\"" << width - mr + 14 << "\" y=\"" << legend_y
            << "\" font-size=\"12\" fill=\"" << color << "\">" << label.str() << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("emit_plot: write failed for " + path);
}

} // namespace scatlab

// grid.hpp -- periodic computational grid on [-L,L]^2, complex fields, and
// the discrete Fourier transform pair used throughout.
//
// Conventions (normative for files and oracles):
//   * n x n samples, row-major, index (i,j) -> x = (-L + i h, -L + j h),
//     h = 2L/n.
//   * frequency index (i,j) -> xi = (pi/L) (wrap(i), wrap(j)) with
//     wrap: {0..n-1} -> {-n/2..n/2-1}.
//   * to_freq carries the h^2 trapezoidal weight, so frequency samples
//     approximate the continuous integral of f(x) e^{-i xi.x}; to_phys
//     carries 1/(2L)^2 per sample. to_phys(to_freq(f)) == f.
//
// Transforms are FFTW-backed; plans are cached per grid size behind a mutex
// (FFTW planning is not thread-safe, executing distinct buffers is).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace scatlab {

using cplx = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct GridSpec {
    int n = 0;
    double half_width = 2.1;

    double spacing() const { return 2.0 * half_width / n; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.n == b.n && a.half_width == b.half_width;
    }
    friend bool operator!=(const GridSpec& a, const GridSpec& b) { return !(a == b); }
};

inline GridSpec make_grid(int n, double half_width = 2.1) {
    if (n < 8) throw std::invalid_argument("make_grid: n must be >= 8");
    if (n % 2 != 0) throw std::invalid_argument("make_grid: n must be even");
    if (!(half_width > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
    return GridSpec{n, half_width};
}

inline int wrap_index(int i, int n) { return i < n / 2 ? i : i - n; }

/// Physical-space point of sample (i,j).
inline Vec2 grid_point(const GridSpec& g, int i, int j) {
    const double h = g.spacing();
    return {-g.half_width + i * h, -g.half_width + j * h};
}

/// Frequency of bin (i,j).
inline Vec2 grid_freq(const GridSpec& g, int i, int j) {
    const double step = M_PI / g.half_width;
    return {step * wrap_index(i, g.n), step * wrap_index(j, g.n)};
}

enum class Space { Physical, Frequency };

struct Field {
    GridSpec spec;
    Space space = Space::Physical;
    std::vector<cplx> data;

    Field() = default;
    Field(const GridSpec& g, Space s) : spec(g), space(s), data(g.size(), cplx{0.0, 0.0}) {}

    cplx& at(int i, int j) { return data[static_cast<std::size_t>(i) * spec.n + j]; }
    const cplx& at(int i, int j) const { return data[static_cast<std::size_t>(i) * spec.n + j]; }
};

inline Field zero_field(const GridSpec& g, Space s = Space::Physical) { return Field(g, s); }

namespace detail {

// One FFTW plan pair per grid size, with aligned scratch buffers. Workspaces
// are handed out per thread; plan creation/destruction is globally locked.
class FftWorkspace {
public:
    explicit FftWorkspace(int n) : n_(n) {
        const std::size_t count = static_cast<std::size_t>(n) * n;
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
        if (!buf_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        forward_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
    }

    ~FftWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buf_);
    }

    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    void execute(const std::vector<cplx>& in, std::vector<cplx>& out, bool forward) {
        const std::size_t count = static_cast<std::size_t>(n_) * n_;
        // std::complex<double> is layout-compatible with fftw_complex
        cplx* buf = reinterpret_cast<cplx*>(buf_);
        std::copy(in.begin(), in.end(), buf);
        fftw_execute(forward ? forward_ : backward_);
        out.resize(count);
        std::copy(buf, buf + count, out.begin());
    }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

private:
    int n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline FftWorkspace& workspace_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftWorkspace>> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<FftWorkspace>(n)).first;
    return *it->second;
}

} // namespace detail

/// Forward transform: physical samples -> frequency samples approximating
/// the continuous Fourier integral.
inline Field to_freq(const Field& f) {
    if (f.space != Space::Physical)
        throw std::invalid_argument("to_freq: field is not in physical space");
    const int n = f.spec.n;
    const double h = f.spec.spacing();
    Field out(f.spec, Space::Frequency);
    detail::workspace_for(n).execute(f.data, out.data, /*forward=*/true);
    // e^{-i xi.x} with x starting at -L contributes the (-1)^{i+j} phase.
    const double h2 = h * h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = ((i + j) & 1) ? -h2 : h2;
            out.at(i, j) *= s;
        }
    return out;
}

/// Inverse transform, exact inverse of to_freq.
inline Field to_phys(const Field& f) {
    if (f.space != Space::Frequency)
        throw std::invalid_argument("to_phys: field is not in frequency space");
    const int n = f.spec.n;
    const double two_l = 2.0 * f.spec.half_width;
    const double scale = 1.0 / (two_l * two_l);
    Field tmp(f.spec, Space::Frequency);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = ((i + j) & 1) ? -scale : scale;
            tmp.at(i, j) = f.at(i, j) * s;
        }
    Field out(f.spec, Space::Physical);
    detail::workspace_for(n).execute(tmp.data, out.data, /*forward=*/false);
    return out;
}

/// Discrete L2 norm h sqrt(sum |f|^2) of a physical field.
inline double l2_norm(const Field& f) {
    double acc = 0.0;
    for (const cplx& z : f.data) acc += std::norm(z);
    return f.spec.spacing() * std::sqrt(acc);
}

/// Discrete Sobolev norm: sqrt(sum <xi>^{2 alpha} |F(xi)|^2) / (2L), which
/// reduces to the discrete L2 norm at alpha = 0 (Parseval).
inline double sobolev_norm(const Field& f, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("sobolev_norm: alpha must be >= 0");
    const Field* freq = &f;
    Field tmp;
    if (f.space == Space::Physical) {
        tmp = to_freq(f);
        freq = &tmp;
    }
    const int n = f.spec.n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 xi = grid_freq(f.spec, i, j);
            const double w = std::pow(1.0 + xi.x * xi.x + xi.y * xi.y, alpha);
            acc += w * std::norm(freq->at(i, j));
        }
    return std::sqrt(acc) / (2.0 * f.spec.half_width);
}

// ---------------------------------------------------------------------------
// Field raster file: CSV with header i,j,x1,x2,re,im, 17 significant digits,
// rows in row-major order.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_field(const Field& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field: cannot open " + path);
    out << "i,j,x1,x2,re,im\n";
    const int n = f.spec.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 p = f.space == Space::Physical ? grid_point(f.spec, i, j)
                                                      : grid_freq(f.spec, i, j);
            const cplx z = f.at(i, j);
            out << i << ',' << j << ','
                << detail::format_g17(p.x) << ',' << detail::format_g17(p.y) << ','
                << detail::format_g17(z.real()) << ',' << detail::format_g17(z.imag())
                << '\n';
        }
    if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

inline Field read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_field: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("i,j,x1,x2,re,im", 0) != 0)
        throw std::runtime_error("read_field: bad header in " + path);
    struct Row { int i, j; double x1, x2, re, im; };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row r{};
        std::istringstream ss(line);
        char c;
        if (!(ss >> r.i >> c >> r.j >> c >> r.x1 >> c >> r.x2 >> c >> r.re >> c >> r.im))
            throw std::runtime_error("read_field: malformed row in " + path);
        rows.push_back(r);
    }
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
    if (rows.empty() || static_cast<std::size_t>(n) * n != rows.size())
        throw std::runtime_error("read_field: row count is not a square in " + path);
    // x of row (0,0) is -L for a physical raster.
    const double half_width = -rows.front().x1;
    Field f(make_grid(n, half_width), Space::Physical);
    for (const Row& r : rows) {
        if (r.i < 0 || r.i >= n || r.j < 0 || r.j >= n)
            throw std::runtime_error("read_field: index out of range in " + path);
        f.at(r.i, r.j) = cplx{r.re, r.im};
    }
    return f;
}

} // namespace scatlab

// gmres.hpp -- restarted GMRES for complex linear operators, used to solve
// the Lippmann-Schwinger system (I - R_k M_q) u = b. Modified Gram-Schmidt
// Arnoldi with Givens rotations; nothing fancy, the systems here are small
// and well conditioned.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace scatlab {

struct GmresResult {
    std::vector<std::complex<double>> x;
    double relative_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline std::complex<double> dot_c(const std::vector<std::complex<double>>& a,
                                  const std::vector<std::complex<double>>& b) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double norm_c(const std::vector<std::complex<double>>& a) {
    double acc = 0.0;
    for (const auto& z : a) acc += std::norm(z);
    return std::sqrt(acc);
}

} // namespace detail

/// Solves A x = b to relative residual ||b - A x|| <= tol ||b||.
inline GmresResult gmres(
    const std::function<void(const std::vector<std::complex<double>>&,
                             std::vector<std::complex<double>>&)>& apply,
    const std::vector<std::complex<double>>& b,
    double tol, int max_iterations = 200, int restart = 50) {
    using vec = std::vector<std::complex<double>>;
    const std::size_t n = b.size();

    GmresResult result;
    result.x.assign(n, {0.0, 0.0});

    const double bnorm = detail::norm_c(b);
    if (bnorm == 0.0) {
        result.converged = true;
        return result;
    }

    vec r = b;   // residual of the zero initial guess
    vec ax(n), w(n);
    int total_iters = 0;

    while (total_iters < max_iterations && !result.converged) {
        const double beta = detail::norm_c(r);
        if (beta / bnorm <= tol) {
            result.relative_residual = beta / bnorm;
            result.converged = true;
            break;
        }
        const int m = std::min(restart, max_iterations - total_iters);
        std::vector<vec> basis;
        basis.reserve(m + 1);
        vec v0(n);
        for (std::size_t i = 0; i < n; ++i) v0[i] = r[i] / beta;
        basis.push_back(std::move(v0));

        // Hessenberg columns with Givens rotations applied on the fly.
        std::vector<std::vector<std::complex<double>>> hess;
        std::vector<std::complex<double>> cs(m), sn(m);
        std::vector<std::complex<double>> g(m + 1, {0.0, 0.0});
        g[0] = beta;

        int k = 0;
        while (k < m && total_iters < max_iterations) {
            apply(basis[k], w);
            std::vector<std::complex<double>> h(k + 2);
            for (int row = 0; row <= k; ++row) {
                h[row] = detail::dot_c(basis[row], w);
                for (std::size_t i = 0; i < n; ++i) w[i] -= h[row] * basis[row][i];
            }
            const double wnorm = detail::norm_c(w);
            h[k + 1] = wnorm;

            for (int row = 0; row < k; ++row) {
                const auto t = std::conj(cs[row]) * h[row] + std::conj(sn[row]) * h[row + 1];
                h[row + 1] = -sn[row] * h[row] + cs[row] * h[row + 1];
                h[row] = t;
            }
            const double denom = std::sqrt(std::norm(h[k]) + std::norm(h[k + 1]));
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k] / denom;
                sn[k] = h[k + 1] / denom;
            }
            h[k] = std::conj(cs[k]) * h[k] + std::conj(sn[k]) * h[k + 1];
            h[k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            hess.push_back(std::move(h));

            ++k;
            ++total_iters;

            if (std::abs(g[k]) / bnorm <= tol || wnorm == 0.0) break;

            vec v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wnorm;
            basis.push_back(std::move(v));
        }

        // back substitution for the k x k triangular system
        std::vector<std::complex<double>> y(k);
        for (int row = k - 1; row >= 0; --row) {
            std::complex<double> acc = g[row];
            for (int col = row + 1; col < k; ++col) acc -= hess[col][row] * y[col];
            y[row] = acc / hess[row][row];
        }
        for (int col = 0; col < k; ++col)
            for (std::size_t i = 0; i < n; ++i)
                result.x[i] += y[col] * basis[col][i];

        apply(result.x, ax);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
        result.relative_residual = detail::norm_c(r) / bnorm;
        if (result.relative_residual <= tol) result.converged = true;
    }

    result.iterations = total_iters;
    return result;
}

} // namespace scatlab

// scene.hpp -- test potentials and the smooth radial cutoff.
//
// Example 1 is piecewise constant (a diamond of height 1.2 inside an annulus
// of height 1); Example 2 is a sum of three Gaussian-type bumps, one of which
// depends on x1 only and is truncated implicitly by the computational box.
// Boundary sets of the piecewise definition take the "otherwise" value, as
// the strict inequalities are written.

#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "scatlab/grid.hpp"

namespace scatlab {

struct PotentialSpec {
    enum class Kind { Example1, Example2, Scaled, Raster };

    Kind kind = Kind::Example1;
    double amplitude = 1.0;                       // Scaled only
    std::shared_ptr<const PotentialSpec> base;    // Scaled only
    std::shared_ptr<const Field> raster;          // Raster only

    static PotentialSpec example1() { return PotentialSpec{Kind::Example1, 1.0, nullptr, nullptr}; }
    static PotentialSpec example2() { return PotentialSpec{Kind::Example2, 1.0, nullptr, nullptr}; }

    static PotentialSpec scaled(const PotentialSpec& b, double eps) {
        PotentialSpec p;
        p.kind = Kind::Scaled;
        p.amplitude = eps;
        p.base = std::make_shared<PotentialSpec>(b);
        return p;
    }

    static PotentialSpec from_raster(Field f) {
        if (f.space != Space::Physical)
            throw std::invalid_argument("PotentialSpec: raster must be a physical field");
        PotentialSpec p;
        p.kind = Kind::Raster;
        p.raster = std::make_shared<Field>(std::move(f));
        return p;
    }

    std::string id() const {
        switch (kind) {
            case Kind::Example1: return "example1";
            case Kind::Example2: return "example2";
            case Kind::Scaled: {
                std::ostringstream ss;
                ss << base->id() << "*" << detail::format_g17(amplitude);
                return ss.str();
            }
            case Kind::Raster: return "raster";
        }
        return "unknown";
    }
};

inline double eval_potential(const PotentialSpec& p, double x1, double x2) {
    switch (p.kind) {
        case PotentialSpec::Kind::Example1: {
            if (std::abs(x1) + std::abs(x2) < 0.3) return 1.2;
            const double r = std::hypot(x1, x2);
            if (0.7 < r && r < 1.0) return 1.0;
            return 0.0;
        }
        case PotentialSpec::Kind::Example2: {
            // three Gaussian bumps centered at (0.5,0), (-1,0.8)/2 = (-0.5,0.4)
            // and 0.4*(-1,-1) = (-0.4,-0.4); all decay far inside [-1,1]^2
            const double d1 = x1 - 0.5, d2 = x2;
            const double t1 = std::max(0.0, std::exp(-5.0 * (d1 * d1 + d2 * d2)));
            const double a1 = x1 + 0.5, a2 = x2 - 0.4;
            const double t2 = 1.5 * std::exp(-4.0 * (a1 * a1 + a2 * a2));
            const double b1 = x1 + 0.4, b2 = x2 + 0.4;
            const double t3 = 2.0 * std::exp(-7.0 * (b1 * b1 + b2 * b2) - 0.4);
            return t1 + t2 + t3;
        }
        case PotentialSpec::Kind::Scaled:
            return p.amplitude * eval_potential(*p.base, x1, x2);
        case PotentialSpec::Kind::Raster: {
            // nearest grid sample; exact on the raster's own nodes
            const GridSpec& g = p.raster->spec;
            const double h = g.spacing();
            int i = static_cast<int>(std::lround((x1 + g.half_width) / h));
            int j = static_cast<int>(std::lround((x2 + g.half_width) / h));
            i = std::clamp(i, 0, g.n - 1);
            j = std::clamp(j, 0, g.n - 1);
            return p.raster->at(i, j).real();
        }
    }
    return 0.0;
}

/// Pointwise sampling of the potential at the grid nodes.
inline Field rasterize(const PotentialSpec& p, const GridSpec& spec) {
    if (p.kind == PotentialSpec::Kind::Raster && p.raster->spec == spec)
        return *p.raster;
    Field f(spec, Space::Physical);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const Vec2 x = grid_point(spec, i, j);
            f.at(i, j) = cplx{eval_potential(p, x.x, x.y), 0.0};
        }
    return f;
}

// ---------------------------------------------------------------------------
// Smooth cutoff: phi == 1 for |x| <= r_inner, phi == 0 for |x| >= r_outer,
// with the standard C^inf step psi(t) = g(1-t)/(g(t)+g(1-t)), g(t) = e^{-1/t}.
// ---------------------------------------------------------------------------

namespace detail {

inline double smooth_bump_g(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double smooth_step(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = smooth_bump_g(t);
    const double b = smooth_bump_g(1.0 - t);
    return b / (a + b);
}

} // namespace detail

struct Cutoff {
    double r_inner = 1.9;
    double r_outer = 2.08;
    Field raster;

    double value(double r) const {
        return detail::smooth_step((r - r_inner) / (r_outer - r_inner));
    }
};

inline Cutoff make_cutoff(const GridSpec& spec, double r_inner = 1.9, double r_outer = 2.08) {
    if (!(0.0 < r_inner) || !(r_inner < r_outer) || !(r_outer <= spec.half_width))
        throw std::invalid_argument("make_cutoff: need 0 < r_inner < r_outer <= L");
    Cutoff c;
    c.r_inner = r_inner;
    c.r_outer = r_outer;
    c.raster = Field(spec, Space::Physical);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const Vec2 x = grid_point(spec, i, j);
            c.raster.at(i, j) = cplx{c.value(std::hypot(x.x, x.y)), 0.0};
        }
    return c;
}

} // namespace scatlab

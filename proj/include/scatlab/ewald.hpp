// ewald.hpp -- the Ewald-sphere parameterization of fixed-angle data: each
// nonzero frequency xi away from the plane xi.theta0 = 0 corresponds to one
// measurement (k, theta, sign) through xi = k (theta - sign theta0), with
// sign = +1 on the half-space xi.theta0 < 0.

#pragma once

#include <cmath>
#include <stdexcept>

#include "scatlab/grid.hpp"

namespace scatlab {

struct EwaldPoint {
    double k = 0.0;
    Vec2 theta;
    int sign = +1;
};

struct DegenerateFrequency : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Solves xi = k (theta - sign theta0) for (k, theta, sign); throws
/// DegenerateFrequency when |xi.theta0| < eps_deg (k would exceed any cap)
/// or xi = 0.
inline EwaldPoint ewald_map(Vec2 xi, Vec2 theta0, double eps_deg) {
    const double proj = dot(xi, theta0);
    if ((xi.x == 0.0 && xi.y == 0.0) || std::abs(proj) < eps_deg)
        throw DegenerateFrequency("ewald_map: frequency too close to the plane xi.theta0 = 0");
    EwaldPoint p;
    p.sign = proj < 0.0 ? +1 : -1;
    p.k = (xi.x * xi.x + xi.y * xi.y) / (2.0 * std::abs(proj));
    p.theta = {xi.x / p.k + p.sign * theta0.x, xi.y / p.k + p.sign * theta0.y};
    return p;
}

} // namespace scatlab

// Independent reference computations used to freeze expected test values.
// Everything here is deliberately written against the math, not against the
// library code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pplab/geometry.hpp"

namespace oracle {

// min distance to Γ by dense sampling of the Γ edge set
inline double brute_force_gamma_distance(const pplab::Domain2D& dom, pplab::Point x,
                                         int samples_per_edge = 20000) {
    double best = 1e300;
    for (const pplab::BoundaryEdge& e : dom.edges()) {
        if (!e.on_gamma) continue;
        for (int i = 0; i <= samples_per_edge; ++i) {
            const double t = static_cast<double>(i) / samples_per_edge;
            const pplab::Point p = e.a + t * (e.b - e.a);
            best = std::min(best, pplab::dist(x, p));
        }
    }
    return best;
}

// structured-grid node count of the L-shape: grid points of pitch h inside
// the closed L (unit square minus the open upper-right quadrant)
inline int l_shape_grid_nodes(double h) {
    const int n = static_cast<int>(std::lround(1.0 / h));
    int count = 0;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double x = i * h, y = j * h;
            if (x > 0.5 + 1e-12 && y > 0.5 + 1e-12) continue;
            ++count;
        }
    }
    return count;
}

// -Δu = 1 on the unit disk with zero boundary data
inline double torsion_disk(double r) { return (1.0 - r * r) / 4.0; }

// -Δ_p u = 1 on the disk of radius `a` (n = 2):
//   u(r) = (p-1)/p · (1/2)^{1/(p-1)} · (a^{p/(p-1)} - r^{p/(p-1)})
inline double radial_p_poisson(double p, double r, double a = 1.0) {
    const double pc = p / (p - 1);
    return (p - 1) / p * std::pow(0.5, 1.0 / (p - 1)) * (std::pow(a, pc) - std::pow(r, pc));
}

// closed-form p-capacity of the concentric annulus (r0, R), n = 2:
//   p = 2: 2π / ln(R/r0);  p ≠ 2: 2π (|m| / |R^m - r0^m|)^{p-1}, m=(p-2)/(p-1)
inline double annulus_capacity(double p, double r0, double R) {
    if (p == 2.0) return 2 * M_PI / std::log(R / r0);
    const double m = (p - 2) / (p - 1);
    return 2 * M_PI * std::pow(std::abs(m) / std::abs(std::pow(R, m) - std::pow(r0, m)), p - 1);
}

// first Dirichlet eigenvalue of the unit square Laplacian
inline double square_eigenvalue() { return 2 * M_PI * M_PI; }

// Wolff potential of a unit point mass seen from distance d, p = 2, top
// radius R: ∫_d^R dr/r = ln(R/d)
inline double wolff_atom(double d, double R) { return std::log(R / d); }

} // namespace oracle

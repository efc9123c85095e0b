#pragma once

#include <array>
#include <functional>

#include "pplab/geometry.hpp"

namespace pplab {

struct TriQuadPoint {
    double l0, l1, l2; // barycentric coordinates
    double w;          // weights sum to 1
};

// Degree-5 seven point rule on the reference triangle.
const std::array<TriQuadPoint, 7>& triangle_rule7();

// Gauss-Legendre nodes/weights on [0,1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_rule(int points); // 4, 8 or 16

// ∫_T f dA with the 7-point rule and `levels` uniform subdivisions.
double integrate_triangle(Point a, Point b, Point c,
                          const std::function<double(Point)>& f, int levels = 0);

// Adaptive version: `refine(tri corners, size)` asks for one more subdivision
// level; recursion depth capped by max_depth.
double integrate_triangle_adaptive(Point a, Point b, Point c,
                                   const std::function<double(Point)>& f,
                                   const std::function<bool(Point, Point, Point, int)>& refine,
                                   int max_depth);

// ∫_a^b f ds on a 1-D interval with composite Gauss-Legendre.
double integrate_interval(double a, double b, const std::function<double(double)>& f,
                          int segments = 1, int points = 8);

} // namespace pplab

#include "pplab/quadrature.hpp"

#include <cmath>

namespace pplab {

const std::array<TriQuadPoint, 7>& triangle_rule7() {
    // Strang-Fix degree 5 rule
    static const double a1 = 0.0597158717897698;
    static const double b1 = 0.4701420641051151;
    static const double a2 = 0.7974269853530873;
    static const double b2 = 0.1012865073234563;
    static const std::array<TriQuadPoint, 7> rule = {{
        {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
        {a1, b1, b1, 0.1323941527885062},
        {b1, a1, b1, 0.1323941527885062},
        {b1, b1, a1, 0.1323941527885062},
        {a2, b2, b2, 0.1259391805448271},
        {b2, a2, b2, 0.1259391805448271},
        {b2, b2, a2, 0.1259391805448271},
    }};
    return rule;
}

const GaussRule& gauss_rule(int points) {
    static const GaussRule g4 = [] {
        GaussRule g;
        const double x[] = {0.3399810435848563, 0.8611363115940526};
        const double w[] = {0.6521451548625461, 0.3478548451374538};
        for (int i = 1; i >= 0; --i) {
            g.x.push_back(0.5 * (1 - x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        for (int i = 0; i < 2; ++i) {
            g.x.push_back(0.5 * (1 + x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        return g;
    }();
    static const GaussRule g8 = [] {
        GaussRule g;
        const double x[] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                            0.9602898564975363};
        const double w[] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                            0.1012285362903763};
        for (int i = 3; i >= 0; --i) {
            g.x.push_back(0.5 * (1 - x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        for (int i = 0; i < 4; ++i) {
            g.x.push_back(0.5 * (1 + x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        return g;
    }();
    static const GaussRule g16 = [] {
        GaussRule g;
        const double x[] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                            0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                            0.9445750230732326, 0.9894009349916499};
        const double w[] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                            0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                            0.0622535239386479, 0.0271524594117541};
        for (int i = 7; i >= 0; --i) {
            g.x.push_back(0.5 * (1 - x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        for (int i = 0; i < 8; ++i) {
            g.x.push_back(0.5 * (1 + x[i]));
            g.w.push_back(0.5 * w[i]);
        }
        return g;
    }();
    if (points <= 4) return g4;
    if (points <= 8) return g8;
    return g16;
}

namespace {

double rule7_on(Point a, Point b, Point c, const std::function<double(Point)>& f) {
    const double area = 0.5 * std::abs(cross(b - a, c - a));
    double s = 0;
    for (const TriQuadPoint& q : triangle_rule7()) {
        const Point x = q.l0 * a + q.l1 * b + q.l2 * c;
        s += q.w * f(x);
    }
    return s * area;
}

} // namespace

double integrate_triangle(Point a, Point b, Point c,
                          const std::function<double(Point)>& f, int levels) {
    if (levels <= 0) return rule7_on(a, b, c, f);
    const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return integrate_triangle(a, ab, ca, f, levels - 1) +
           integrate_triangle(ab, b, bc, f, levels - 1) +
           integrate_triangle(ca, bc, c, f, levels - 1) +
           integrate_triangle(ab, bc, ca, f, levels - 1);
}

double integrate_triangle_adaptive(Point a, Point b, Point c,
                                   const std::function<double(Point)>& f,
                                   const std::function<bool(Point, Point, Point, int)>& refine,
                                   int max_depth) {
    if (max_depth > 0 && refine(a, b, c, max_depth)) {
        const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        return integrate_triangle_adaptive(a, ab, ca, f, refine, max_depth - 1) +
               integrate_triangle_adaptive(ab, b, bc, f, refine, max_depth - 1) +
               integrate_triangle_adaptive(ca, bc, c, f, refine, max_depth - 1) +
               integrate_triangle_adaptive(ab, bc, ca, f, refine, max_depth - 1);
    }
    return rule7_on(a, b, c, f);
}

double integrate_interval(double a, double b, const std::function<double(double)>& f,
                          int segments, int points) {
    const GaussRule& g = gauss_rule(points);
    const double len = (b - a) / segments;
    double s = 0;
    for (int k = 0; k < segments; ++k) {
        const double x0 = a + k * len;
        for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(x0 + g.x[i] * len);
    }
    return s * len;
}

} // namespace pplab

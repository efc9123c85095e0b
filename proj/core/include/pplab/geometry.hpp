#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pplab/error.hpp"

namespace pplab {

struct Point {
    double x = 0;
    double y = 0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point p);
double dist(Point a, Point b);

struct Rect {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    bool contains(Point p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

struct Segment {
    Point a, b;
    double length() const { return dist(a, b); }
};

// Distance from a point to a closed segment.
double segment_distance(Point p, Segment s);

// Signed area of a simple polygon (positive for counter-clockwise).
double polygon_area(std::span<const Point> pts);

// Even-odd containment test; points on the boundary count as inside.
bool polygon_contains(std::span<const Point> pts, Point p, double tol = 1e-12);

// Clip a simple polygon against the half-plane  dot(n, x) <= c
// (Sutherland-Hodgman step; subject may be concave).
std::vector<Point> clip_half_plane(std::span<const Point> subject, Point n, double c);

// Clip a simple polygon against an axis-aligned rectangle.
std::vector<Point> clip_rect(std::span<const Point> subject, const Rect& r);

// Clip a simple polygon against a convex window polygon (CCW).
std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> window);

// piece \ rect as up to four disjoint pieces (convex-window clips).
std::vector<std::vector<Point>> subtract_rect(std::span<const Point> piece, const Rect& r);

double segment_segment_distance(Segment s, Segment t);

// Exact area of polygon ∩ disk via Green's theorem with circular arcs.
double disk_polygon_area(std::span<const Point> poly, Point center, double radius);

// Vertices of the regular n-gon inscribed in the circle (center, radius),
// first vertex at angle 0.
std::vector<Point> regular_ngon(Point center, double radius, int n);

// Triangulate a simple polygon (CCW, no repeated vertices) by ear clipping.
// Every input vertex appears as a triangle corner; no new vertices are added.
std::vector<std::array<int, 3>> ear_clip(std::span<const Point> pts);

struct BoundaryEdge {
    Point a, b;
    bool on_gamma = false;
};

// Bounded polygonal open set with an optional list of rectangular holes and
// a designated closed boundary portion Γ (a union of whole boundary edges).
class Domain2D {
public:
    // `gamma_edges` indexes into the edge list: outer edges first (edge i runs
    // from outer vertex i to i+1), then 4 edges per hole. Empty list = Γ = ∂Ω.
    static Domain2D polygon(std::vector<Point> outer,
                            std::vector<Rect> holes = {},
                            std::vector<int> gamma_edges = {});

    static Domain2D unit_square();
    // Unit square minus its upper-right quadrant.
    static Domain2D l_shape();
    static Domain2D disk(Point center, double radius, int ngon = 256);

    Domain2D with_gamma(std::vector<int> gamma_edges) const;
    Domain2D with_empty_gamma() const;
    Domain2D with_full_gamma() const;
    // Delegate Γ queries to a parent domain (local subdomains of Ω keep the
    // global distance function δ_Γ).
    Domain2D with_gamma_reference(std::shared_ptr<const Domain2D> parent) const;

    const std::vector<Point>& outer() const { return outer_; }
    const std::vector<Rect>& holes() const { return holes_; }
    std::span<const BoundaryEdge> edges() const { return edges_; }
    std::span<const BoundaryEdge> gamma() const;

    bool gamma_empty() const {
        return gamma_ref_ ? gamma_ref_->gamma_empty() : gamma_count_ == 0;
    }
    double diameter() const { return diam_; }
    double area() const;

    bool contains(Point p) const;          // open Ω
    bool contains_closed(Point p) const;   // Ω̄

    double distance_to_boundary(Point p) const;
    // Distance to the Γ edge set; throws "gamma-empty" when Γ = ∅.
    double distance_to_gamma(Point p) const;

    Rect bbox() const { return bbox_; }

private:
    Domain2D() = default;
    void finalize();

    std::vector<Point> outer_;
    std::vector<Rect> holes_;
    std::vector<BoundaryEdge> edges_; // gamma edges sorted first is NOT assumed
    int gamma_count_ = 0;
    double diam_ = 0;
    double area_ = 0;
    Rect bbox_;
    std::shared_ptr<const Domain2D> gamma_ref_;
};

// min distance from x to Γ. Exact for polygonal Γ.
double distance_to_gamma(const Domain2D& domain, Point x);

} // namespace pplab

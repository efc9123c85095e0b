#include "pplab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pplab {

double norm(Point p) { return std::hypot(p.x, p.y); }
double dist(Point a, Point b) { return norm(a - b); }

double segment_distance(Point p, Segment s) {
    const Point d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 == 0) return dist(p, s.a);
    double t = dot(p - s.a, d) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, s.a + t * d);
}

double polygon_area(std::span<const Point> pts) {
    double twice = 0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = pts[i];
        const Point& b = pts[(i + 1) % n];
        twice += cross(a, b);
    }
    return 0.5 * twice;
}

bool polygon_contains(std::span<const Point> pts, Point p, double tol) {
    const std::size_t n = pts.size();
    // boundary counts as inside
    for (std::size_t i = 0; i < n; ++i) {
        if (segment_distance(p, {pts[i], pts[(i + 1) % n]}) <= tol) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = pts[i];
        const Point& b = pts[j];
        const bool straddles = (a.y > p.y) != (b.y > p.y);
        if (straddles) {
            const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

std::vector<Point> clip_half_plane(std::span<const Point> subject, Point n, double c) {
    std::vector<Point> out;
    const std::size_t k = subject.size();
    if (k == 0) return out;
    out.reserve(k + 4);
    for (std::size_t i = 0; i < k; ++i) {
        const Point cur = subject[i];
        const Point nxt = subject[(i + 1) % k];
        const double dc = dot(n, cur) - c;
        const double dn = dot(n, nxt) - c;
        const bool cur_in = dc <= 0;
        const bool nxt_in = dn <= 0;
        if (cur_in) out.push_back(cur);
        if (cur_in != nxt_in) {
            const double t = dc / (dc - dn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

std::vector<Point> clip_rect(std::span<const Point> subject, const Rect& r) {
    std::vector<Point> p = clip_half_plane(subject, {1, 0}, r.xmax);
    p = clip_half_plane(p, {-1, 0}, -r.xmin);
    p = clip_half_plane(p, {0, 1}, r.ymax);
    p = clip_half_plane(p, {0, -1}, -r.ymin);
    return p;
}

std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> window) {
    std::vector<Point> p(subject.begin(), subject.end());
    const std::size_t m = window.size();
    for (std::size_t i = 0; i < m && !p.empty(); ++i) {
        const Point a = window[i];
        const Point b = window[(i + 1) % m];
        // inside of a CCW window is to the left of (a,b): cross(b-a, x-a) >= 0
        const Point e = b - a;
        const Point n{e.y, -e.x}; // dot(n, x) <= dot(n, a) on the left
        p = clip_half_plane(p, n, dot(n, a));
    }
    return p;
}

std::vector<std::vector<Point>> subtract_rect(std::span<const Point> piece, const Rect& r) {
    std::vector<std::vector<Point>> out;
    auto push = [&](std::vector<Point> p) {
        if (p.size() >= 3) out.push_back(std::move(p));
    };
    push(clip_half_plane(piece, {1, 0}, r.xmin));         // x <= xmin
    push(clip_half_plane(piece, {-1, 0}, -r.xmax));       // x >= xmax
    auto band = clip_half_plane(piece, {-1, 0}, -r.xmin); // xmin <= x <= xmax
    band = clip_half_plane(band, {1, 0}, r.xmax);
    push(clip_half_plane(band, {0, 1}, r.ymin));          // y <= ymin
    push(clip_half_plane(band, {0, -1}, -r.ymax));        // y >= ymax
    return out;
}

double segment_segment_distance(Segment s, Segment t) {
    const Point d1 = s.b - s.a, d2 = t.b - t.a;
    const double c1 = cross(d1, t.a - s.a), c2 = cross(d1, t.b - s.a);
    const double c3 = cross(d2, s.a - t.a), c4 = cross(d2, s.b - t.a);
    if (((c1 > 0) != (c2 > 0)) && ((c3 > 0) != (c4 > 0))) return 0; // proper crossing
    return std::min({segment_distance(t.a, s), segment_distance(t.b, s),
                     segment_distance(s.a, t), segment_distance(s.b, t)});
}

double disk_polygon_area(std::span<const Point> poly, Point center, double radius) {
    // Green's theorem along ∂(poly ∩ disk): straight pieces contribute the
    // usual cross-product terms, gaps along the circle contribute arcs.
    const std::size_t n = poly.size();
    if (n < 3) return 0;
    const double r2 = radius * radius;
    double twice = 0;

    auto angle = [&](Point p) { return std::atan2(p.y, p.x); };

    // Track arc contributions via the summed swept angle between exit and
    // re-entry points; equivalently add arc terms edge by edge.
    for (std::size_t i = 0; i < n; ++i) {
        Point a = poly[i] - center;
        Point b = poly[(i + 1) % n] - center;
        const Point d = b - a;
        const double dd = dot(d, d);
        const bool a_in = dot(a, a) <= r2;
        const bool b_in = dot(b, b) <= r2;

        if (dd == 0) continue;
        // Intersections of the segment with the circle: |a + t d|^2 = r^2,
        // i.e. t^2 - 2 tb t + (|a|^2 - r^2)/|d|^2 = 0 with tb = -a·d/|d|^2.
        const double tb = -dot(a, d) / dd;
        const double disc = tb * tb - (dot(a, a) - r2) / dd;

        if (a_in && b_in) {
            twice += cross(a, b);
            continue;
        }
        if (disc <= 0) {
            // no crossing: the whole edge is outside, replace by an arc
            twice += r2 * std::remainder(angle(b) - angle(a), 2 * M_PI);
            continue;
        }
        const double sq = std::sqrt(disc);
        const double t0 = tb - sq;
        const double t1 = tb + sq;
        if (a_in && !b_in) {
            const Point q = a + std::clamp(t1, 0.0, 1.0) * d;
            twice += cross(a, q);
            twice += r2 * std::remainder(angle(b) - angle(q), 2 * M_PI);
        } else if (!a_in && b_in) {
            const Point q = a + std::clamp(t0, 0.0, 1.0) * d;
            twice += r2 * std::remainder(angle(q) - angle(a), 2 * M_PI);
            twice += cross(q, b);
        } else {
            // both endpoints outside; the segment may dip through the disk
            if (t0 > 0 && t1 < 1 && t0 < t1) {
                const Point q0 = a + t0 * d;
                const Point q1 = a + t1 * d;
                twice += r2 * std::remainder(angle(q0) - angle(a), 2 * M_PI);
                twice += cross(q0, q1);
                twice += r2 * std::remainder(angle(b) - angle(q1), 2 * M_PI);
            } else {
                twice += r2 * std::remainder(angle(b) - angle(a), 2 * M_PI);
            }
        }
    }
    return 0.5 * twice;
}

std::vector<Point> regular_ngon(Point center, double radius, int n) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = 2 * M_PI * i / n;
        pts.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
    return pts;
}

namespace {

bool point_in_triangle(Point p, Point a, Point b, Point c, double eps) {
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    return d1 >= -eps && d2 >= -eps && d3 >= -eps;
}

} // namespace

std::vector<std::array<int, 3>> ear_clip(std::span<const Point> pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::array<int, 3>> tris;
    if (n < 3) return tris;
    tris.reserve(static_cast<std::size_t>(n - 2));

    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

    // scale-aware degeneracy threshold
    double scale = 0;
    for (const Point& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    const double eps = 1e-14 * std::max(scale * scale, 1e-300);

    int guard = 0;
    while (idx.size() > 3 && guard < 4 * n * n) {
        bool clipped = false;
        const int m = static_cast<int>(idx.size());
        for (int i = 0; i < m; ++i) {
            const int ia = idx[static_cast<std::size_t>((i + m - 1) % m)];
            const int ib = idx[static_cast<std::size_t>(i)];
            const int ic = idx[static_cast<std::size_t>((i + 1) % m)];
            const Point a = pts[static_cast<std::size_t>(ia)];
            const Point b = pts[static_cast<std::size_t>(ib)];
            const Point c = pts[static_cast<std::size_t>(ic)];
            const double a2 = cross(b - a, c - a);
            if (a2 <= eps) continue; // reflex or degenerate corner
            bool contains_other = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (point_in_triangle(pts[static_cast<std::size_t>(j)], a, b, c, eps)) {
                    contains_other = true;
                    break;
                }
            }
            if (contains_other) continue;
            tris.push_back({ia, ib, ic});
            idx.erase(idx.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) {
            // numerically stuck (collinear chain): drop the flattest corner
            int best = 0;
            double best_a2 = std::numeric_limits<double>::max();
            const int mm = static_cast<int>(idx.size());
            for (int i = 0; i < mm; ++i) {
                const Point a = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>((i + mm - 1) % mm)])];
                const Point b = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                const Point c = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>((i + 1) % mm)])];
                const double a2 = std::abs(cross(b - a, c - a));
                if (a2 < best_a2) {
                    best_a2 = a2;
                    best = i;
                }
            }
            idx.erase(idx.begin() + best);
        }
        ++guard;
    }
    if (idx.size() == 3) tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

Domain2D Domain2D::polygon(std::vector<Point> outer, std::vector<Rect> holes,
                           std::vector<int> gamma_edges) {
    if (outer.size() < 3) fail("bad-domain", "outer boundary needs at least 3 vertices");
    if (polygon_area(outer) <= 0) fail("bad-domain", "outer boundary must be CCW with positive area");

    Domain2D d;
    d.outer_ = std::move(outer);
    d.holes_ = std::move(holes);

    const std::size_t n = d.outer_.size();
    for (std::size_t i = 0; i < n; ++i) {
        d.edges_.push_back({d.outer_[i], d.outer_[(i + 1) % n], false});
    }
    for (const Rect& h : d.holes_) {
        if (h.width() <= 0 || h.height() <= 0) fail("bad-domain", "degenerate hole");
        const Point p0{h.xmin, h.ymin}, p1{h.xmax, h.ymin}, p2{h.xmax, h.ymax}, p3{h.xmin, h.ymax};
        d.edges_.push_back({p0, p1, false});
        d.edges_.push_back({p1, p2, false});
        d.edges_.push_back({p2, p3, false});
        d.edges_.push_back({p3, p0, false});
    }

    if (gamma_edges.empty()) {
        for (auto& e : d.edges_) e.on_gamma = true;
        d.gamma_count_ = static_cast<int>(d.edges_.size());
    } else {
        for (int id : gamma_edges) {
            if (id < 0 || id >= static_cast<int>(d.edges_.size()))
                fail("bad-domain", "gamma edge index out of range");
            if (!d.edges_[static_cast<std::size_t>(id)].on_gamma) {
                d.edges_[static_cast<std::size_t>(id)].on_gamma = true;
                ++d.gamma_count_;
            }
        }
    }
    d.finalize();
    return d;
}

void Domain2D::finalize() {
    double dmax = 0;
    for (std::size_t i = 0; i < outer_.size(); ++i)
        for (std::size_t j = i + 1; j < outer_.size(); ++j)
            dmax = std::max(dmax, dist(outer_[i], outer_[j]));
    diam_ = dmax;

    double xmin = outer_[0].x, xmax = outer_[0].x, ymin = outer_[0].y, ymax = outer_[0].y;
    for (const Point& p : outer_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    bbox_ = {xmin, ymin, xmax, ymax};

    area_ = polygon_area(outer_);
    for (const Rect& h : holes_) area_ -= h.width() * h.height();
    if (area_ <= 0) fail("bad-domain", "holes exhaust the domain");
}

Domain2D Domain2D::unit_square() {
    return polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

Domain2D Domain2D::l_shape() {
    return polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}});
}

Domain2D Domain2D::disk(Point center, double radius, int ngon) {
    if (radius <= 0 || ngon < 8) fail("bad-domain", "disk needs radius > 0 and ngon >= 8");
    return polygon(regular_ngon(center, radius, ngon));
}

Domain2D Domain2D::with_gamma(std::vector<int> gamma_edges) const {
    Domain2D d = *this;
    for (auto& e : d.edges_) e.on_gamma = false;
    d.gamma_count_ = 0;
    for (int id : gamma_edges) {
        if (id < 0 || id >= static_cast<int>(d.edges_.size()))
            fail("bad-domain", "gamma edge index out of range");
        if (!d.edges_[static_cast<std::size_t>(id)].on_gamma) {
            d.edges_[static_cast<std::size_t>(id)].on_gamma = true;
            ++d.gamma_count_;
        }
    }
    return d;
}

Domain2D Domain2D::with_empty_gamma() const {
    Domain2D d = *this;
    for (auto& e : d.edges_) e.on_gamma = false;
    d.gamma_count_ = 0;
    return d;
}

Domain2D Domain2D::with_full_gamma() const {
    Domain2D d = *this;
    for (auto& e : d.edges_) e.on_gamma = true;
    d.gamma_count_ = static_cast<int>(d.edges_.size());
    return d;
}

Domain2D Domain2D::with_gamma_reference(std::shared_ptr<const Domain2D> parent) const {
    Domain2D d = *this;
    d.gamma_ref_ = std::move(parent);
    return d;
}

std::span<const BoundaryEdge> Domain2D::gamma() const {
    return edges_; // callers filter by on_gamma; kept simple
}

double Domain2D::area() const { return area_; }

bool Domain2D::contains(Point p) const {
    const double tol = 1e-12 * std::max(1.0, diam_);
    if (distance_to_boundary(p) <= tol) return false;
    if (!polygon_contains(outer_, p, 0)) return false;
    for (const Rect& h : holes_) {
        if (h.contains(p)) return false;
    }
    return true;
}

bool Domain2D::contains_closed(Point p) const {
    const double tol = 1e-12 * std::max(1.0, diam_);
    if (distance_to_boundary(p) <= tol) return true;
    return contains(p);
}

double Domain2D::distance_to_boundary(Point p) const {
    double d = std::numeric_limits<double>::max();
    for (const BoundaryEdge& e : edges_) d = std::min(d, segment_distance(p, {e.a, e.b}));
    return d;
}

double Domain2D::distance_to_gamma(Point p) const {
    if (gamma_ref_) return gamma_ref_->distance_to_gamma(p);
    if (gamma_count_ == 0) fail("gamma-empty", "distance_to_gamma with empty gamma");
    double d = std::numeric_limits<double>::max();
    for (const BoundaryEdge& e : edges_) {
        if (!e.on_gamma) continue;
        d = std::min(d, segment_distance(p, {e.a, e.b}));
    }
    return d;
}

double distance_to_gamma(const Domain2D& domain, Point x) {
    return domain.distance_to_gamma(x);
}

} // namespace pplab

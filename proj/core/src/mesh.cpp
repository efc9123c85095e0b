#include "pplab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

namespace pplab {

namespace {

// Remove repeated and collinear vertices; returns a clean CCW polygon.
std::vector<Point> clean_polygon(std::vector<Point> p, double merge_tol, double area_eps) {
    // merge consecutive duplicates
    std::vector<Point> q;
    for (const Point& v : p) {
        if (q.empty() || dist(q.back(), v) > merge_tol) q.push_back(v);
    }
    while (q.size() > 1 && dist(q.front(), q.back()) <= merge_tol) q.pop_back();
    if (q.size() < 3) return {};

    // drop collinear vertices (they would produce zero-area ears)
    std::vector<Point> r;
    const std::size_t n = q.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = q[(i + n - 1) % n];
        const Point& b = q[i];
        const Point& c = q[(i + 1) % n];
        if (std::abs(cross(b - a, c - b)) > area_eps) r.push_back(b);
    }
    if (r.size() < 3) return {};
    if (polygon_area(r) <= area_eps) return {};
    return r;
}

struct NodeKey {
    std::int64_t qx, qy;
    bool operator<(const NodeKey& o) const {
        return qx < o.qx || (qx == o.qx && qy < o.qy);
    }
};

} // namespace

TriMesh build_mesh(const Domain2D& domain, double target_h) {
    if (!(target_h > 0)) fail("bad-domain", "target_h must be positive");
    const Rect box = domain.bbox();
    const double scale = std::max({1.0, box.width(), box.height()});
    if (target_h > std::max(box.width(), box.height()))
        fail("bad-domain", "target_h exceeds the domain size");

    const double hgrid = target_h;
    const int nx = std::max(1, static_cast<int>(std::ceil((box.width() - 1e-12 * scale) / hgrid)));
    const int ny = std::max(1, static_cast<int>(std::ceil((box.height() - 1e-12 * scale) / hgrid)));

    // Cells touched by a boundary edge need full clipping; the rest are
    // classified by their center point.
    std::vector<std::uint8_t> touched(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
    auto mark = [&](int ci, int cj) {
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int ii = ci + di, jj = cj + dj;
                if (ii >= 0 && ii < nx && jj >= 0 && jj < ny)
                    touched[static_cast<std::size_t>(jj) * static_cast<std::size_t>(nx) +
                            static_cast<std::size_t>(ii)] = 1;
            }
    };
    for (const BoundaryEdge& e : domain.edges()) {
        const double len = dist(e.a, e.b);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * hgrid))));
        for (int s = 0; s <= steps; ++s) {
            const Point p = e.a + (static_cast<double>(s) / steps) * (e.b - e.a);
            const int ci = static_cast<int>(std::floor((p.x - box.xmin) / hgrid));
            const int cj = static_cast<int>(std::floor((p.y - box.ymin) / hgrid));
            mark(ci, cj);
        }
    }

    const double merge_tol = std::max(1e-12 * scale, 1e-7 * hgrid);
    const double area_eps = 0.25 * merge_tol * hgrid;

    std::map<NodeKey, int> node_ids;
    std::vector<Point> nodes;
    std::vector<Tri> tris;
    auto node_id = [&](Point p) {
        const std::int64_t qx = static_cast<std::int64_t>(std::llround(p.x / merge_tol));
        const std::int64_t qy = static_cast<std::int64_t>(std::llround(p.y / merge_tol));
        // scan neighbor buckets: near-identical points from adjacent cells may
        // quantize across a bucket boundary
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = node_ids.find(NodeKey{qx + dx, qy + dy});
                if (it != node_ids.end() &&
                    dist(nodes[static_cast<std::size_t>(it->second)], p) <= merge_tol)
                    return it->second;
            }
        }
        const int id = static_cast<int>(nodes.size());
        node_ids.emplace(NodeKey{qx, qy}, id);
        nodes.push_back(p);
        return id;
    };
    auto add_tri = [&](Point a, Point b, Point c) {
        const int ia = node_id(a), ib = node_id(b), ic = node_id(c);
        if (ia == ib || ib == ic || ia == ic) return;
        const double a2 = cross(nodes[static_cast<std::size_t>(ib)] - nodes[static_cast<std::size_t>(ia)],
                                nodes[static_cast<std::size_t>(ic)] - nodes[static_cast<std::size_t>(ia)]);
        if (a2 <= area_eps) return;
        tris.push_back({{ia, ib, ic}});
    };

    const auto& outer = domain.outer();
    for (int cj = 0; cj < ny; ++cj) {
        for (int ci = 0; ci < nx; ++ci) {
            const Rect cell{box.xmin + ci * hgrid, box.ymin + cj * hgrid,
                            box.xmin + (ci + 1) * hgrid, box.ymin + (cj + 1) * hgrid};
            const Point bl{cell.xmin, cell.ymin}, br{cell.xmax, cell.ymin},
                tr{cell.xmax, cell.ymax}, tl{cell.xmin, cell.ymax};

            const bool near_boundary =
                touched[static_cast<std::size_t>(cj) * static_cast<std::size_t>(nx) +
                        static_cast<std::size_t>(ci)] != 0;
            if (!near_boundary) {
                const Point center{0.5 * (cell.xmin + cell.xmax), 0.5 * (cell.ymin + cell.ymax)};
                if (!domain.contains(center)) continue;
                if ((ci + cj) % 2 == 0) {
                    add_tri(bl, br, tr);
                    add_tri(bl, tr, tl);
                } else {
                    add_tri(bl, br, tl);
                    add_tri(br, tr, tl);
                }
                continue;
            }

            std::vector<std::vector<Point>> pieces;
            {
                auto piece = clip_rect(outer, cell);
                if (piece.size() >= 3) pieces.push_back(std::move(piece));
            }
            for (const Rect& hole : domain.holes()) {
                std::vector<std::vector<Point>> next;
                for (const auto& piece : pieces) {
                    auto parts = subtract_rect(piece, hole);
                    for (auto& part : parts)
                        if (part.size() >= 3) next.push_back(std::move(part));
                }
                pieces = std::move(next);
            }

            for (auto& raw : pieces) {
                auto piece = clean_polygon(std::move(raw), merge_tol, area_eps);
                if (piece.size() < 3) continue;
                if (piece.size() == 4) {
                    // whole cell survived: keep the structured split
                    bool full = true;
                    const Point corners[4] = {bl, br, tr, tl};
                    for (const Point& c : corners) {
                        bool found = false;
                        for (const Point& v : piece)
                            if (dist(v, c) <= merge_tol) found = true;
                        if (!found) {
                            full = false;
                            break;
                        }
                    }
                    if (full) {
                        if ((ci + cj) % 2 == 0) {
                            add_tri(bl, br, tr);
                            add_tri(bl, tr, tl);
                        } else {
                            add_tri(bl, br, tl);
                            add_tri(br, tr, tl);
                        }
                        continue;
                    }
                }
                const auto local = ear_clip(piece);
                for (const auto& t : local)
                    add_tri(piece[static_cast<std::size_t>(t[0])],
                            piece[static_cast<std::size_t>(t[1])],
                            piece[static_cast<std::size_t>(t[2])]);
            }
        }
    }

    if (tris.empty()) fail("bad-domain", "meshing produced no triangles");

    TriMesh mesh;
    mesh.domain_ = std::make_shared<Domain2D>(domain);
    mesh.nodes_ = std::move(nodes);
    mesh.tris_ = std::move(tris);
    mesh.spacing_ = hgrid;

    const std::size_t nt = mesh.tris_.size();
    mesh.tri_area_.resize(nt);
    mesh.tri_grad_.resize(nt);
    double hmax = 0;
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& v = mesh.tris_[t].v;
        const Point p0 = mesh.nodes_[static_cast<std::size_t>(v[0])];
        const Point p1 = mesh.nodes_[static_cast<std::size_t>(v[1])];
        const Point p2 = mesh.nodes_[static_cast<std::size_t>(v[2])];
        const double a2 = cross(p1 - p0, p2 - p0);
        mesh.tri_area_[t] = 0.5 * a2;
        const double inv = 1.0 / a2;
        mesh.tri_grad_[t][0] = {(p1.y - p2.y) * inv, (p2.x - p1.x) * inv};
        mesh.tri_grad_[t][1] = {(p2.y - p0.y) * inv, (p0.x - p2.x) * inv};
        mesh.tri_grad_[t][2] = {(p0.y - p1.y) * inv, (p1.x - p0.x) * inv};
        hmax = std::max({hmax, dist(p0, p1), dist(p1, p2), dist(p2, p0)});
    }
    mesh.h_ = hmax;

    // boundary nodes = endpoints of edges with a single adjacent triangle
    std::map<std::pair<int, int>, int> edge_count;
    for (const Tri& t : mesh.tris_) {
        for (int k = 0; k < 3; ++k) {
            int a = t.v[static_cast<std::size_t>(k)];
            int b = t.v[static_cast<std::size_t>((k + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    mesh.is_boundary_.assign(mesh.nodes_.size(), false);
    for (const auto& [e, c] : edge_count) {
        if (c == 1) {
            mesh.is_boundary_[static_cast<std::size_t>(e.first)] = true;
            mesh.is_boundary_[static_cast<std::size_t>(e.second)] = true;
        }
    }
    mesh.on_gamma_.assign(mesh.nodes_.size(), false);
    const double gamma_tol = 10 * merge_tol;
    for (std::size_t i = 0; i < mesh.nodes_.size(); ++i) {
        if (!mesh.is_boundary_[i]) continue;
        mesh.boundary_nodes_.push_back(static_cast<int>(i));
        if (!domain.gamma_empty() &&
            domain.distance_to_gamma(mesh.nodes_[i]) <= gamma_tol)
            mesh.on_gamma_[i] = true;
    }
    for (std::size_t i = 0; i < mesh.nodes_.size(); ++i)
        if (!mesh.is_boundary_[i]) mesh.interior_nodes_.push_back(static_cast<int>(i));

    mesh.build_locator();
    return mesh;
}

double TriMesh::total_area() const {
    double a = 0;
    for (double t : tri_area_) a += t;
    return a;
}

void TriMesh::build_locator() {
    loc_box_ = domain_->bbox();
    loc_cell_ = std::max(spacing_, 1e-12);
    loc_nx_ = std::max(1, static_cast<int>(std::ceil(loc_box_.width() / loc_cell_)) + 1);
    loc_ny_ = std::max(1, static_cast<int>(std::ceil(loc_box_.height() / loc_cell_)) + 1);
    loc_bins_.assign(static_cast<std::size_t>(loc_nx_) * static_cast<std::size_t>(loc_ny_), {});
    for (int t = 0; t < tri_count(); ++t) {
        const auto& v = tris_[static_cast<std::size_t>(t)].v;
        double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (int k = 0; k < 3; ++k) {
            const Point p = nodes_[static_cast<std::size_t>(v[static_cast<std::size_t>(k)])];
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        const int i0 = std::clamp(static_cast<int>((xmin - loc_box_.xmin) / loc_cell_), 0, loc_nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((xmax - loc_box_.xmin) / loc_cell_), 0, loc_nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((ymin - loc_box_.ymin) / loc_cell_), 0, loc_ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((ymax - loc_box_.ymin) / loc_cell_), 0, loc_ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                loc_bins_[static_cast<std::size_t>(j) * static_cast<std::size_t>(loc_nx_) +
                          static_cast<std::size_t>(i)]
                    .push_back(t);
    }
}

int TriMesh::locate(Point p) const {
    const int i = std::clamp(static_cast<int>((p.x - loc_box_.xmin) / loc_cell_), 0, loc_nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - loc_box_.ymin) / loc_cell_), 0, loc_ny_ - 1);
    const double eps = 1e-12 * std::max(1.0, domain_->diameter());
    const auto& bin = loc_bins_[static_cast<std::size_t>(j) * static_cast<std::size_t>(loc_nx_) +
                                static_cast<std::size_t>(i)];
    for (int t : bin) {
        const auto& v = tris_[static_cast<std::size_t>(t)].v;
        const Point a = nodes_[static_cast<std::size_t>(v[0])];
        const Point b = nodes_[static_cast<std::size_t>(v[1])];
        const Point c = nodes_[static_cast<std::size_t>(v[2])];
        const double s = 2 * tri_area_[static_cast<std::size_t>(t)];
        if (cross(b - a, p - a) >= -eps * s && cross(c - b, p - b) >= -eps * s &&
            cross(a - c, p - c) >= -eps * s)
            return t;
    }
    return -1;
}

double TriMesh::interpolate(const Eigen::VectorXd& nodal, Point p) const {
    const int t = locate(p);
    if (t < 0) fail("bad-domain", "interpolation point outside mesh");
    const auto& v = tris_[static_cast<std::size_t>(t)].v;
    const Point a = nodes_[static_cast<std::size_t>(v[0])];
    const Point b = nodes_[static_cast<std::size_t>(v[1])];
    const Point c = nodes_[static_cast<std::size_t>(v[2])];
    const double a2 = cross(b - a, c - a);
    const double w0 = cross(b - p, c - p) / a2;
    const double w1 = cross(c - p, a - p) / a2;
    const double w2 = 1.0 - w0 - w1;
    return w0 * nodal[v[0]] + w1 * nodal[v[1]] + w2 * nodal[v[2]];
}

} // namespace pplab

#include "pplab/capacity.hpp"

#include <algorithm>
#include <cmath>

namespace pplab {

Compact2D Compact2D::polygon(std::vector<Point> pts) {
    if (pts.size() < 3) fail("bad-condenser", "condenser polygon needs >= 3 vertices");
    if (polygon_area(pts) <= 0) fail("bad-condenser", "condenser polygon must be CCW");
    Compact2D k;
    k.pts_ = std::move(pts);
    double xmin = k.pts_[0].x, xmax = xmin, ymin = k.pts_[0].y, ymax = ymin;
    for (const Point& p : k.pts_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    k.bbox_ = {xmin, ymin, xmax, ymax};
    return k;
}

Compact2D Compact2D::disk(Point center, double radius, int ngon) {
    return polygon(regular_ngon(center, radius, ngon));
}

bool Compact2D::contains(Point p) const {
    if (pts_.empty()) return false;
    if (!bbox_.contains(p)) return false;
    return polygon_contains(pts_, p, 1e-12 * std::max(1.0, bbox_.width() + bbox_.height()));
}

bool Compact2D::intersects_triangle(Point a, Point b, Point c) const {
    if (pts_.empty()) return false;
    const double xmin = std::min({a.x, b.x, c.x}), xmax = std::max({a.x, b.x, c.x});
    const double ymin = std::min({a.y, b.y, c.y}), ymax = std::max({a.y, b.y, c.y});
    if (xmax < bbox_.xmin || xmin > bbox_.xmax || ymax < bbox_.ymin || ymin > bbox_.ymax)
        return false;
    if (contains(a) || contains(b) || contains(c)) return true;
    const Point tri[3] = {a, b, c};
    // any K vertex inside the triangle
    const double a2 = cross(b - a, c - a);
    for (const Point& p : pts_) {
        if (cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0 &&
            a2 > 0)
            return true;
    }
    // edge crossings
    const std::size_t n = pts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Segment ke{pts_[i], pts_[(i + 1) % n]};
        for (int e = 0; e < 3; ++e) {
            const Segment te{tri[e], tri[(e + 1) % 3]};
            if (segment_segment_distance(ke, te) == 0) return true;
        }
    }
    return false;
}

CapacityReport capacity(const Compact2D& K, const Domain2D& U, double p, double target_h,
                        CondenserConstraint mode, const SolveConfig& cfg) {
    CapacityReport rep;
    rep.p = p;

    auto mesh = std::make_shared<TriMesh>(build_mesh(U, target_h));
    rep.mesh_h = mesh->h();

    if (K.is_empty()) {
        rep.minimizer = ScalarField(mesh, Eigen::VectorXd::Zero(mesh->node_count()));
        rep.value = 0;
        return rep;
    }

    for (const Point& v : K.points()) {
        if (!U.contains(v)) fail("bad-condenser", "condenser set is not contained in U");
    }

    std::vector<bool> constrained(static_cast<std::size_t>(mesh->node_count()), false);
    if (mode == CondenserConstraint::CoverTriangles) {
        for (int t = 0; t < mesh->tri_count(); ++t) {
            const auto& v = mesh->triangles()[static_cast<std::size_t>(t)].v;
            const Point a = mesh->nodes()[static_cast<std::size_t>(v[0])];
            const Point b = mesh->nodes()[static_cast<std::size_t>(v[1])];
            const Point c = mesh->nodes()[static_cast<std::size_t>(v[2])];
            if (K.intersects_triangle(a, b, c))
                for (int k = 0; k < 3; ++k)
                    constrained[static_cast<std::size_t>(v[static_cast<std::size_t>(k)])] = true;
        }
    } else {
        for (int i = 0; i < mesh->node_count(); ++i)
            if (K.contains(mesh->nodes()[static_cast<std::size_t>(i)])) constrained[static_cast<std::size_t>(i)] = true;
    }

    DirichletSet bc;
    int k_nodes = 0;
    for (int i = 0; i < mesh->node_count(); ++i) {
        const bool on_k = constrained[static_cast<std::size_t>(i)];
        const bool on_b = mesh->is_boundary_node(i);
        if (on_k && on_b) fail("bad-condenser", "K touches the outer boundary at mesh scale");
        if (on_k) {
            bc.nodes.push_back(i);
            bc.values.push_back(1);
            ++k_nodes;
        } else if (on_b) {
            bc.nodes.push_back(i);
            bc.values.push_back(0);
        }
    }
    if (k_nodes == 0) fail("under-resolved", "no mesh node lies in the condenser set");
    rep.constrained_nodes = k_nodes;

    const EllipticOperator op = EllipticOperator::p_laplacian(p);
    ScalarField u = solve_constrained(op, Eigen::VectorXd::Zero(mesh->node_count()), mesh, bc, cfg);
    rep.value = u.p_energy(op);
    rep.minimizer = std::move(u);
    return rep;
}

CapacityReport capacity_region(const std::function<bool(Point)>& k_contains, const Domain2D& U,
                               double p, double target_h, const SolveConfig& cfg) {
    CapacityReport rep;
    rep.p = p;
    auto mesh = std::make_shared<TriMesh>(build_mesh(U, target_h));
    rep.mesh_h = mesh->h();

    DirichletSet bc;
    int k_nodes = 0;
    for (int i = 0; i < mesh->node_count(); ++i) {
        const bool on_k = k_contains(mesh->nodes()[static_cast<std::size_t>(i)]);
        const bool on_b = mesh->is_boundary_node(i);
        if (on_k) {
            bc.nodes.push_back(i);
            bc.values.push_back(1);
            ++k_nodes;
        } else if (on_b) {
            bc.nodes.push_back(i);
            bc.values.push_back(0);
        }
    }
    rep.constrained_nodes = k_nodes;
    if (k_nodes == 0) {
        rep.minimizer = ScalarField(mesh, Eigen::VectorXd::Zero(mesh->node_count()));
        rep.value = 0;
        return rep;
    }
    const EllipticOperator op = EllipticOperator::p_laplacian(p);
    ScalarField u = solve_constrained(op, Eigen::VectorXd::Zero(mesh->node_count()), mesh, bc, cfg);
    rep.value = u.p_energy(op);
    rep.minimizer = std::move(u);
    return rep;
}

CdcReport cdc_check(const Domain2D& domain, double p, const std::vector<double>& radii,
                    int boundary_samples, const SolveConfig& cfg) {
    if (domain.gamma_empty()) fail("gamma-empty", "CDC scan needs nonempty gamma");
    if (radii.empty()) fail("bad-condenser", "CDC scan needs at least one radius");
    for (double r : radii)
        if (!(r > 0) || r > domain.diameter())
            fail("bad-condenser", "CDC radii must lie in (0, diam]");

    // ξ samples: Γ vertices and edge midpoints, then extra equally spaced
    // points per edge until the budget is filled.
    std::vector<Point> xis;
    for (const BoundaryEdge& e : domain.edges()) {
        if (!e.on_gamma) continue;
        xis.push_back(e.a);
        xis.push_back(0.5 * (e.a + e.b));
    }
    if (static_cast<int>(xis.size()) > boundary_samples) xis.resize(static_cast<std::size_t>(boundary_samples));

    CdcReport rep;
    rep.gamma_estimate = 1;
    bool any_valid = false;

    // reference denominator at R = 1, rescaled by R^{2-p}
    double den_ref = 0;
    if (p == 2) {
        den_ref = 2 * M_PI / std::log(2.0);
    } else {
        const Domain2D uref = Domain2D::disk({0, 0}, 2, 128);
        const Compact2D kref = Compact2D::disk({0, 0}, 1, 128);
        den_ref = capacity(kref, uref, p, 1.0 / 16, CondenserConstraint::CoverTriangles, cfg).value;
    }

    for (const Point& xi : xis) {
        for (double R : radii) {
            CdcSample s;
            s.xi = xi;
            s.R = R;
            s.denominator = p == 2 ? den_ref : den_ref * std::pow(R, 2 - p);

            const Domain2D ball = Domain2D::disk(xi, 2 * R, 128);
            auto k_contains = [&](Point x) {
                return dist(x, xi) <= R && !domain.contains(x);
            };
            CapacityReport num = capacity_region(k_contains, ball, p, R / 12, cfg);
            s.numerator = num.value;
            if (num.constrained_nodes == 0) {
                s.under_resolved = true;
                s.ratio = 0;
            } else {
                s.ratio = s.numerator / s.denominator;
                rep.gamma_estimate = std::min(rep.gamma_estimate, s.ratio);
                any_valid = true;
            }
            rep.samples.push_back(s);
        }
    }
    if (!any_valid) rep.gamma_estimate = 0;
    return rep;
}

} // namespace pplab

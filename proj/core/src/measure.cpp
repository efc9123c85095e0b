#include "pplab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "pplab/quadrature.hpp"

namespace pplab {

namespace {

constexpr int kBallPolygonSides = 128;

double profile_value(DensityProfile p, Point x) {
    switch (p) {
        case DensityProfile::Constant: return 1;
        case DensityProfile::CoordX: return x.x;
        case DensityProfile::CoordY: return x.y;
    }
    return 1;
}

double gamma_distance_or_inf(const Domain2D& domain, Point x) {
    return domain.gamma_empty() ? kInfinity : domain.distance_to_gamma(x);
}

// pointwise density value without the support indicator (support handled by clipping
// or by the caller)
double density_value(const DensityComponent& d, const Domain2D& domain, Point x) {
    double v = d.amplitude * profile_value(d.profile, x);
    if (d.gamma_exponent != 0 || d.min_gamma_dist > 0) {
        const double dg = gamma_distance_or_inf(domain, x);
        if (dg <= d.min_gamma_dist) return 0;
        if (d.gamma_exponent != 0) v *= std::pow(dg, -d.gamma_exponent);
    }
    return v;
}

bool gamma_touches_ball(const Domain2D& domain, Point center, double r) {
    if (domain.gamma_empty()) return false;
    return domain.distance_to_gamma(center) <= r;
}

// ---- density component mass over Ω ∩ B(center, r) ----

double density_ball_mass(const DensityComponent& d, Point center, double r,
                         const Domain2D& domain) {
    if (d.amplitude == 0) return 0;

    if (d.gamma_exponent >= 2 && d.min_gamma_dist <= 0 && gamma_touches_ball(domain, center, r)) {
        bool in_support = true;
        if (d.support) {
            // the divergence needs Γ inside the support
            bool near = false;
            for (const BoundaryEdge& e : domain.edges()) {
                if (!e.on_gamma) continue;
                const Point mid = 0.5 * (e.a + e.b);
                if ((d.support->contains(e.a) || d.support->contains(e.b) ||
                     d.support->contains(mid)) &&
                    std::min({dist(e.a, center), dist(e.b, center), dist(mid, center)}) <=
                        r + 0.3 * dist(e.a, e.b))
                    near = true;
            }
            in_support = near;
        }
        if (in_support) return kInfinity;
    }

    const bool ball_inside_domain = domain.distance_to_boundary(center) >= r;
    const bool ball_inside_support =
        !d.support || (center.x - r >= d.support->xmin && center.x + r <= d.support->xmax &&
                       center.y - r >= d.support->ymin && center.y + r <= d.support->ymax);
    const double dg = gamma_distance_or_inf(domain, center);
    const bool cut_inactive = d.min_gamma_dist <= 0 || dg - r > d.min_gamma_dist;
    const bool cut_kills = d.min_gamma_dist > 0 && dg + r <= d.min_gamma_dist;
    if (cut_kills) return 0;

    // exact path: constant profile, unweighted
    if (d.profile == DensityProfile::Constant && d.gamma_exponent == 0 && cut_inactive) {
        if (ball_inside_domain && ball_inside_support)
            return d.amplitude * M_PI * r * r;
        std::vector<Point> eff(domain.outer().begin(), domain.outer().end());
        if (d.support) eff = clip_rect(eff, *d.support);
        if (eff.size() < 3) return 0;
        double area = disk_polygon_area(eff, center, r);
        for (const Rect& h : domain.holes()) {
            Rect hh = h;
            if (d.support) {
                hh.xmin = std::max(hh.xmin, d.support->xmin);
                hh.xmax = std::min(hh.xmax, d.support->xmax);
                hh.ymin = std::max(hh.ymin, d.support->ymin);
                hh.ymax = std::min(hh.ymax, d.support->ymax);
                if (hh.width() <= 0 || hh.height() <= 0) continue;
            }
            const std::vector<Point> hp{{hh.xmin, hh.ymin}, {hh.xmax, hh.ymin},
                                        {hh.xmax, hh.ymax}, {hh.xmin, hh.ymax}};
            area -= disk_polygon_area(hp, center, r);
        }
        return d.amplitude * std::max(0.0, area);
    }

    // linear profiles over a full disk: exact first moment
    if (d.gamma_exponent == 0 && cut_inactive && ball_inside_domain && ball_inside_support) {
        const double a = M_PI * r * r;
        if (d.profile == DensityProfile::CoordX) return d.amplitude * a * center.x;
        if (d.profile == DensityProfile::CoordY) return d.amplitude * a * center.y;
    }

    // smooth path: no active indicator inside the ball, polar quadrature
    if (ball_inside_domain && ball_inside_support && cut_inactive) {
        const GaussRule& gr = gauss_rule(8);
        const GaussRule& gt = gauss_rule(4);
        const int sectors = 48;
        double sum = 0;
        for (int s = 0; s < sectors; ++s) {
            const double th0 = 2 * M_PI * s / sectors;
            const double dth = 2 * M_PI / sectors;
            for (std::size_t it = 0; it < gt.x.size(); ++it) {
                const double th = th0 + gt.x[it] * dth;
                const double wt = gt.w[it] * dth;
                for (std::size_t ir = 0; ir < gr.x.size(); ++ir) {
                    const double rho = gr.x[ir] * r;
                    const double wr = gr.w[ir] * r;
                    const Point x{center.x + rho * std::cos(th), center.y + rho * std::sin(th)};
                    sum += wt * wr * rho * density_value(d, domain, x);
                }
            }
        }
        return sum;
    }

    // general path: clip to polygons and integrate triangles adaptively
    std::vector<Point> eff(domain.outer().begin(), domain.outer().end());
    if (d.support) eff = clip_rect(eff, *d.support);
    if (eff.size() < 3) return 0;
    const auto ball = regular_ngon(center, r, kBallPolygonSides);
    std::vector<std::vector<Point>> pieces;
    {
        auto piece = clip_convex(eff, ball);
        if (piece.size() >= 3) pieces.push_back(std::move(piece));
    }
    for (const Rect& h : domain.holes()) {
        std::vector<std::vector<Point>> next;
        for (const auto& piece : pieces)
            for (auto& part : subtract_rect(piece, h))
                if (part.size() >= 3) next.push_back(std::move(part));
        pieces = std::move(next);
    }

    auto f = [&](Point x) { return density_value(d, domain, x); };
    auto refine = [&](Point a, Point b, Point c, int) {
        const double size = std::max({dist(a, b), dist(b, c), dist(c, a)});
        if (d.gamma_exponent > 0) {
            const double dmin = std::min({gamma_distance_or_inf(domain, a),
                                          gamma_distance_or_inf(domain, b),
                                          gamma_distance_or_inf(domain, c)});
            if (dmin < 2 * size) return true;
        }
        if (d.min_gamma_dist > 0) {
            const double d0 = gamma_distance_or_inf(domain, a) - d.min_gamma_dist;
            const double d1 = gamma_distance_or_inf(domain, b) - d.min_gamma_dist;
            const double d2 = gamma_distance_or_inf(domain, c) - d.min_gamma_dist;
            if ((d0 > 0) != (d1 > 0) || (d1 > 0) != (d2 > 0)) return true;
        }
        return false;
    };
    double sum = 0;
    for (const auto& piece : pieces) {
        const auto tris = ear_clip(piece);
        for (const auto& t : tris) {
            sum += integrate_triangle_adaptive(piece[static_cast<std::size_t>(t[0])],
                                               piece[static_cast<std::size_t>(t[1])],
                                               piece[static_cast<std::size_t>(t[2])], f, refine, 6);
        }
    }
    return sum;
}

// ---- segment component ----

double segment_ball_mass(const SegmentComponent& sc, Point center, double r,
                         const Domain2D& domain) {
    const Point d = sc.b - sc.a;
    const double dd = dot(d, d);
    if (dd == 0) return 0;
    const Point a = sc.a - center;
    const double tb = -dot(a, d) / dd;
    const double disc = tb * tb - (dot(a, a) - r * r) / dd;
    if (disc <= 0) return 0;
    const double sq = std::sqrt(disc);
    const double s0 = std::max(0.0, tb - sq);
    const double s1 = std::min(1.0, tb + sq);
    if (s1 <= s0) return 0;
    const double len = std::sqrt(dd);

    if (sc.gamma_exponent >= 1 && sc.min_gamma_dist <= 0 && !domain.gamma_empty()) {
        const Segment active{sc.a + s0 * d, sc.a + s1 * d};
        double dmin = kInfinity;
        for (const BoundaryEdge& e : domain.edges()) {
            if (!e.on_gamma) continue;
            dmin = std::min(dmin, segment_segment_distance(active, {e.a, e.b}));
        }
        if (dmin <= 1e-12 * std::max(1.0, domain.diameter())) return kInfinity;
    }

    auto rho = [&](double s) { return sc.rho0 + (sc.rho1 - sc.rho0) * s; };
    if (sc.gamma_exponent == 0 && sc.min_gamma_dist <= 0) {
        // exact for linear density
        const double mid = 0.5 * (s0 + s1);
        return (s1 - s0) * rho(mid) * len;
    }
    auto f = [&](double s) {
        const Point x = sc.a + s * d;
        const double dg = gamma_distance_or_inf(domain, x);
        if (dg <= sc.min_gamma_dist) return 0.0;
        double v = rho(s);
        if (sc.gamma_exponent != 0) v *= std::pow(dg, -sc.gamma_exponent);
        return v;
    };
    return len * integrate_interval(s0, s1, f, 32, 8);
}

double atom_ball_mass(const AtomComponent& at, Point center, double r, const Domain2D& domain) {
    if (dist(at.position, center) > r) return 0;
    if (at.min_gamma_dist > 0 && gamma_distance_or_inf(domain, at.position) <= at.min_gamma_dist)
        return 0;
    return at.mass;
}

double part_ball_mass(const ChargePart& part, Point center, double r, const Domain2D& domain) {
    double sum = 0;
    for (const auto& d : part.densities) {
        const double m = density_ball_mass(d, center, r, domain);
        if (std::isinf(m)) return kInfinity;
        sum += m;
    }
    for (const auto& s : part.segments) {
        const double m = segment_ball_mass(s, center, r, domain);
        if (std::isinf(m)) return kInfinity;
        sum += m;
    }
    for (const auto& a : part.atoms) sum += atom_ball_mass(a, center, r, domain);
    return sum;
}

} // namespace

RadonCharge RadonCharge::lebesgue(double c) {
    RadonCharge nu;
    DensityComponent d;
    d.amplitude = std::abs(c);
    nu.add(d, c < 0);
    nu.set_declared_q(kInfinity);
    return nu;
}

RadonCharge RadonCharge::density(DensityComponent d) {
    RadonCharge nu;
    if (d.amplitude < 0) fail("bad-charge", "density amplitude must be nonnegative");
    nu.add(d, false);
    if (d.gamma_exponent == 0) nu.set_declared_q(kInfinity);
    return nu;
}

RadonCharge RadonCharge::segment(Point a, Point b, double rho0, double rho1) {
    RadonCharge nu;
    SegmentComponent s;
    s.a = a;
    s.b = b;
    s.rho0 = rho0;
    s.rho1 = rho1 < 0 ? rho0 : rho1;
    if (s.rho0 < 0 || s.rho1 < 0) fail("bad-charge", "segment density must be nonnegative");
    nu.add(s, false);
    nu.set_declared_q(2); // H^1 on a line segment lies in M^n, n = 2
    return nu;
}

RadonCharge RadonCharge::atom(Point x, double mass) {
    if (mass <= 0) fail("bad-charge", "atom mass must be positive");
    RadonCharge nu;
    nu.add(AtomComponent{x, mass, 0}, false);
    nu.set_declared_q(1);
    return nu;
}

RadonCharge& RadonCharge::add(DensityComponent d, bool negative) {
    (negative ? neg_ : pos_).densities.push_back(d);
    return *this;
}
RadonCharge& RadonCharge::add(SegmentComponent s, bool negative) {
    (negative ? neg_ : pos_).segments.push_back(s);
    return *this;
}
RadonCharge& RadonCharge::add(AtomComponent a, bool negative) {
    (negative ? neg_ : pos_).atoms.push_back(a);
    return *this;
}

double RadonCharge::max_gamma_exponent() const {
    double t = 0;
    for (const ChargePart* part : {&pos_, &neg_}) {
        for (const auto& d : part->densities) t = std::max(t, d.gamma_exponent);
        for (const auto& s : part->segments) t = std::max(t, s.gamma_exponent);
    }
    return t;
}

RadonCharge RadonCharge::scaled(double c) const {
    if (!(c > 0)) fail("bad-charge", "scaling factor must be positive");
    RadonCharge out = *this;
    for (ChargePart* part : {&out.pos_, &out.neg_}) {
        for (auto& d : part->densities) d.amplitude *= c;
        for (auto& s : part->segments) {
            s.rho0 *= c;
            s.rho1 *= c;
        }
        for (auto& a : part->atoms) a.mass *= c;
    }
    return out;
}

RadonCharge RadonCharge::restricted_away_from_gamma(double cut) const {
    RadonCharge out = *this;
    for (ChargePart* part : {&out.pos_, &out.neg_}) {
        for (auto& d : part->densities) d.min_gamma_dist = std::max(d.min_gamma_dist, cut);
        for (auto& s : part->segments) s.min_gamma_dist = std::max(s.min_gamma_dist, cut);
        for (auto& a : part->atoms) a.min_gamma_dist = std::max(a.min_gamma_dist, cut);
    }
    return out;
}

RadonCharge RadonCharge::operator+(const RadonCharge& other) const {
    RadonCharge out = *this;
    auto append = [](ChargePart& dst, const ChargePart& src) {
        dst.densities.insert(dst.densities.end(), src.densities.begin(), src.densities.end());
        dst.segments.insert(dst.segments.end(), src.segments.begin(), src.segments.end());
        dst.atoms.insert(dst.atoms.end(), src.atoms.begin(), src.atoms.end());
    };
    append(out.pos_, other.pos_);
    append(out.neg_, other.neg_);
    out.declared_q_.reset();
    return out;
}

double ball_mass(const RadonCharge& charge, Part part, Point center, double r,
                 const Domain2D& domain) {
    if (!(r > 0)) fail("bad-exponent", "ball radius must be positive");
    double sum = 0;
    if (part == Part::Positive || part == Part::Total)
        sum += part_ball_mass(charge.positive(), center, r, domain);
    if (part == Part::Negative || part == Part::Total)
        sum += part_ball_mass(charge.negative(), center, r, domain);
    return sum;
}

ScanSpec ScanSpec::defaults(const Domain2D& domain, const TriMesh* mesh) {
    ScanSpec scan;
    const double diam = domain.diameter();
    if (mesh != nullptr) {
        for (int i : mesh->interior_nodes()) scan.centers.push_back(mesh->nodes()[static_cast<std::size_t>(i)]);
    } else {
        const Rect box = domain.bbox();
        const int n = 24;
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) {
                const Point p{box.xmin + box.width() * i / n, box.ymin + box.height() * j / n};
                if (domain.contains(p)) scan.centers.push_back(p);
            }
    }
    // probes marching inward from Γ to resolve near-boundary concentration
    for (const BoundaryEdge& e : domain.edges()) {
        if (!e.on_gamma) continue;
        const Point mid = 0.5 * (e.a + e.b);
        const Point tangent = e.b - e.a;
        const double len = norm(tangent);
        if (len == 0) continue;
        const Point n1{-tangent.y / len, tangent.x / len};
        for (int j = 2; j <= scan.levels; ++j) {
            const double off = diam * std::pow(2.0, -j);
            const Point p1 = mid + off * n1;
            const Point p2 = mid + (-off) * n1;
            if (domain.contains(p1))
                scan.centers.push_back(p1);
            else if (domain.contains(p2))
                scan.centers.push_back(p2);
        }
    }
    return scan;
}

MorreyReport morrey_norm(const RadonCharge& charge, double q, MorreyMode mode,
                         const Domain2D& domain, const ScanSpec& scan) {
    if (!(q >= 1)) fail("bad-exponent", "Morrey exponent must satisfy q >= 1");
    constexpr int n = 2;
    const double expo = n * (1.0 - 1.0 / q); // n/q'

    MorreyReport rep;
    rep.q = q;
    rep.mode = mode;

    // analytic short-circuits
    if (q > 1) {
        for (const ChargePart* part : {&charge.positive(), &charge.negative()}) {
            for (const auto& a : part->atoms) {
                if (!domain.contains(a.position)) continue;
                if (a.min_gamma_dist > 0 &&
                    gamma_distance_or_inf(domain, a.position) <= a.min_gamma_dist)
                    continue;
                rep.divergent = true;
            }
            for (const auto& d : part->densities)
                if (d.amplitude > 0 && d.gamma_exponent >= n && d.min_gamma_dist <= 0 &&
                    !domain.gamma_empty())
                    rep.divergent = true;
        }
    }

    const double diam = domain.diameter();
    std::vector<double> level_max(static_cast<std::size_t>(scan.levels) + 1, 0.0);
    bool have_witness = false;

    for (const Point& x : scan.centers) {
        if (!domain.contains(x)) continue;
        double rcap = kInfinity;
        if (mode == MorreyMode::Floated) {
            if (domain.gamma_empty()) {
                rcap = kInfinity; // Γ = ∅: every radius is admissible
            } else {
                rcap = domain.distance_to_gamma(x) / 2;
            }
        }
        bool any = false;
        for (int j = 0; j <= scan.levels; ++j) {
            const double r = diam * std::pow(2.0, -j);
            if (mode == MorreyMode::Floated && !(r < rcap)) continue;
            any = true;
            const double m = ball_mass(charge, Part::Total, x, r, domain);
            ++rep.samples;
            if (std::isinf(m)) {
                rep.divergent = true;
                continue;
            }
            const double v = std::pow(r, -expo) * m;
            level_max[static_cast<std::size_t>(j)] =
                std::max(level_max[static_cast<std::size_t>(j)], v);
            if (!have_witness || v > rep.value) {
                rep.value = v;
                rep.witness_center = x;
                rep.witness_radius = r;
                have_witness = true;
            }
        }
        if (!any) ++rep.skipped_centers;
    }

    // growth test: per-level maxima still climbing at the finest level
    if (q > 1 && scan.levels >= 1) {
        int finest = scan.levels;
        while (finest > 0 && level_max[static_cast<std::size_t>(finest)] == 0) --finest;
        if (finest >= 1) {
            const double vj = level_max[static_cast<std::size_t>(finest)];
            const double vp = level_max[static_cast<std::size_t>(finest - 1)];
            bool is_peak = true;
            for (int j = 0; j < finest; ++j)
                if (level_max[static_cast<std::size_t>(j)] > vj) is_peak = false;
            if (is_peak && vp > 0 && vj / vp > std::pow(2.0, expo) / 2) rep.divergent = true;
        }
    }
    return rep;
}

double beta_exponent(double p, double q, int n) {
    if (!(p > 1) || !(p <= n)) fail("bad-exponent", "p must lie in (1, n]");
    if (!(q > n / p)) fail("beta-nonpositive", "q must exceed n/p");
    const double nq = std::isinf(q) ? 0.0 : n / q;
    return (p - nq) / (p - 1);
}

RadonCharge distance_weight(const RadonCharge& charge, double t, const Domain2D& domain) {
    if (t < 0) fail("weight-out-of-range", "t must be nonnegative");
    if (charge.has_atoms()) fail("weighted-atom", "atoms cannot carry a distance weight");
    if (t == 0) return charge;
    if (domain.gamma_empty()) fail("gamma-empty", "distance weight needs nonempty gamma");

    if (!charge.declared_q())
        fail("weight-out-of-range", "charge has no declared Morrey class");
    const double q = *charge.declared_q();
    constexpr double n = 2;
    const double limit = std::isinf(q) ? n : n * (q - 1) / q;
    if (t > limit + 1e-12) fail("weight-out-of-range", "t exceeds the admissible range");

    RadonCharge weighted;
    auto bump = [&](const ChargePart& src, bool negative) {
        for (auto d : src.densities) {
            d.gamma_exponent += t;
            weighted.add(d, negative);
        }
        for (auto s : src.segments) {
            s.gamma_exponent += t;
            weighted.add(s, negative);
        }
    };
    bump(charge.positive(), false);
    bump(charge.negative(), true);
    const double new_q = std::isinf(q) ? n / t : q * n / (n + q * t);
    weighted.set_declared_q(new_q);
    return weighted;
}

Eigen::VectorXd project_load(const RadonCharge& charge, const TriMesh& mesh) {
    const Domain2D& domain = mesh.domain();
    Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.node_count());

    auto add_density = [&](const DensityComponent& d, double sign) {
        if (d.amplitude == 0) return;
        if (d.gamma_exponent >= 2 && d.min_gamma_dist <= 0 && !domain.gamma_empty())
            fail("non-integrable-load", "distance weight with t >= n has no finite load");
        const bool plain = d.profile == DensityProfile::Constant && !d.support &&
                           d.gamma_exponent == 0 && d.min_gamma_dist <= 0;
        for (int t = 0; t < mesh.tri_count(); ++t) {
            const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
            const Point a = mesh.nodes()[static_cast<std::size_t>(v[0])];
            const Point b = mesh.nodes()[static_cast<std::size_t>(v[1])];
            const Point c = mesh.nodes()[static_cast<std::size_t>(v[2])];
            if (plain) {
                const double w = sign * d.amplitude * mesh.tri_area(t) / 3;
                load[v[0]] += w;
                load[v[1]] += w;
                load[v[2]] += w;
                continue;
            }
            if (d.support) {
                const double xmin = std::min({a.x, b.x, c.x}), xmax = std::max({a.x, b.x, c.x});
                const double ymin = std::min({a.y, b.y, c.y}), ymax = std::max({a.y, b.y, c.y});
                if (xmax < d.support->xmin || xmin > d.support->xmax || ymax < d.support->ymin ||
                    ymin > d.support->ymax)
                    continue;
            }
            const double a2 = cross(b - a, c - a);
            auto refine = [&](Point ta, Point tb, Point tc, int) {
                const double size = std::max({dist(ta, tb), dist(tb, tc), dist(tc, ta)});
                if (d.gamma_exponent > 0 && !domain.gamma_empty()) {
                    const double dmin = std::min({domain.distance_to_gamma(ta),
                                                  domain.distance_to_gamma(tb),
                                                  domain.distance_to_gamma(tc)});
                    if (dmin < 2 * size) return true;
                }
                if (d.min_gamma_dist > 0 && !domain.gamma_empty()) {
                    const double d0 = domain.distance_to_gamma(ta) - d.min_gamma_dist;
                    const double d1 = domain.distance_to_gamma(tb) - d.min_gamma_dist;
                    const double d2 = domain.distance_to_gamma(tc) - d.min_gamma_dist;
                    if ((d0 > 0) != (d1 > 0) || (d1 > 0) != (d2 > 0)) return true;
                }
                if (d.support) {
                    int inside = 0;
                    for (const Point& p : {ta, tb, tc})
                        if (d.support->contains(p)) ++inside;
                    if (inside != 0 && inside != 3) return true;
                }
                return false;
            };
            for (int k = 0; k < 3; ++k) {
                auto f = [&](Point x) {
                    if (d.support && !d.support->contains(x)) return 0.0;
                    // barycentric basis value of local vertex k at x
                    double w = 0;
                    if (k == 0)
                        w = cross(b - x, c - x) / a2;
                    else if (k == 1)
                        w = cross(c - x, a - x) / a2;
                    else
                        w = cross(a - x, b - x) / a2;
                    return density_value(d, domain, x) * w;
                };
                load[v[k]] += sign * integrate_triangle_adaptive(a, b, c, f, refine, 2);
            }
        }
    };

    auto add_segment = [&](const SegmentComponent& s, double sign) {
        if (s.gamma_exponent >= 1 && s.min_gamma_dist <= 0 && !domain.gamma_empty()) {
            double dmin = kInfinity;
            for (const BoundaryEdge& e : domain.edges()) {
                if (!e.on_gamma) continue;
                dmin = std::min(dmin, segment_segment_distance({s.a, s.b}, {e.a, e.b}));
            }
            if (dmin <= 1e-12 * std::max(1.0, domain.diameter()))
                fail("non-integrable-load", "segment weight diverges on gamma");
        }
        const Point dvec = s.b - s.a;
        const double len = norm(dvec);
        if (len == 0) return;
        for (int t = 0; t < mesh.tri_count(); ++t) {
            const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
            const Point a = mesh.nodes()[static_cast<std::size_t>(v[0])];
            const Point b = mesh.nodes()[static_cast<std::size_t>(v[1])];
            const Point c = mesh.nodes()[static_cast<std::size_t>(v[2])];
            // clip the parameter interval against the triangle half-planes
            double s0 = 0, s1 = 1;
            const Point verts[3] = {a, b, c};
            bool empty = false;
            for (int e = 0; e < 3 && !empty; ++e) {
                const Point pa = verts[e], pb = verts[(e + 1) % 3];
                const Point edge = pb - pa;
                // inside: cross(edge, x - pa) >= 0
                const double f0 = cross(edge, s.a - pa);
                const double f1 = cross(edge, s.b - pa);
                const double df = f1 - f0;
                if (std::abs(df) < 1e-300) {
                    if (f0 < 0) empty = true;
                    continue;
                }
                const double sc = -f0 / df;
                if (df > 0)
                    s0 = std::max(s0, sc);
                else
                    s1 = std::min(s1, sc);
                if (s0 >= s1) empty = true;
            }
            if (empty || s1 - s0 <= 1e-14) continue;
            const double a2 = cross(b - a, c - a);
            for (int k = 0; k < 3; ++k) {
                auto f = [&](double sp) {
                    const Point x = s.a + sp * dvec;
                    const double dg = gamma_distance_or_inf(domain, x);
                    if (dg <= s.min_gamma_dist) return 0.0;
                    double val = s.rho0 + (s.rho1 - s.rho0) * sp;
                    if (s.gamma_exponent != 0) val *= std::pow(dg, -s.gamma_exponent);
                    double w = 0;
                    if (k == 0)
                        w = cross(b - x, c - x) / a2;
                    else if (k == 1)
                        w = cross(c - x, a - x) / a2;
                    else
                        w = cross(a - x, b - x) / a2;
                    return val * w;
                };
                load[v[k]] += sign * len * integrate_interval(s0, s1, f, 8, 8);
            }
        }
    };

    auto add_atom = [&](const AtomComponent& at, double sign) {
        if (at.min_gamma_dist > 0 &&
            gamma_distance_or_inf(domain, at.position) <= at.min_gamma_dist)
            return;
        const int t = mesh.locate(at.position);
        if (t < 0) fail("bad-charge", "atom lies outside the mesh");
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        const Point a = mesh.nodes()[static_cast<std::size_t>(v[0])];
        const Point b = mesh.nodes()[static_cast<std::size_t>(v[1])];
        const Point c = mesh.nodes()[static_cast<std::size_t>(v[2])];
        const double a2 = cross(b - a, c - a);
        const Point x = at.position;
        load[v[0]] += sign * at.mass * cross(b - x, c - x) / a2;
        load[v[1]] += sign * at.mass * cross(c - x, a - x) / a2;
        load[v[2]] += sign * at.mass * cross(a - x, b - x) / a2;
    };

    for (const auto& d : charge.positive().densities) add_density(d, 1);
    for (const auto& d : charge.negative().densities) add_density(d, -1);
    for (const auto& s : charge.positive().segments) add_segment(s, 1);
    for (const auto& s : charge.negative().segments) add_segment(s, -1);
    for (const auto& a : charge.positive().atoms) add_atom(a, 1);
    for (const auto& a : charge.negative().atoms) add_atom(a, -1);
    return load;
}

} // namespace pplab

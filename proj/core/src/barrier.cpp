#include "pplab/barrier.hpp"

#include <algorithm>
#include <cmath>

namespace pplab {

namespace {

std::vector<Point> clean_loop(std::vector<Point> p, double tol) {
    std::vector<Point> q;
    for (const Point& v : p)
        if (q.empty() || dist(q.back(), v) > tol) q.push_back(v);
    while (q.size() > 1 && dist(q.front(), q.back()) <= tol) q.pop_back();
    return q;
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3 - 2 * t);
}

} // namespace

void BarrierConfig::validate() const {
    if (!(theta > 0) || !(theta < 1)) fail("bad-config", "theta must lie in (0,1)");
    if (!(beta0 > 0) || !(beta0 <= 1)) fail("bad-config", "beta0 must lie in (0,1]");
    if (k_min >= k_max) fail("bad-config", "k_min must be below k_max");
    if (!(covering_overlap >= 1)) fail("bad-config", "covering_overlap must be >= 1");
    if (local_resolution < 8) fail("bad-config", "local_resolution too coarse");
}

AuxiliaryResult auxiliary_solution(const Domain2D& domain, Point xi, double R,
                                   const RadonCharge& nu_k, const EllipticOperator& op,
                                   double theta, double beta0, double local_h,
                                   const SolveConfig& cfg, AuxCheckPolicy policy) {
    if (domain.gamma_empty()) fail("gamma-empty", "auxiliary solve needs nonempty gamma");
    if (domain.distance_to_gamma(xi) > 1e-9 * std::max(1.0, domain.diameter()))
        fail("bad-config", "ball center must lie on gamma");
    if (!(R > 0) || R > domain.diameter()) fail("bad-config", "ball radius out of range");

    const double plateau = 0.25 * std::pow(theta * R, beta0);
    const double ceiling = std::pow(R, beta0);

    // local domain Ω ∩ B(ξ,R); Γ distances stay those of the parent domain
    const auto ballpoly = regular_ngon(xi, R, 64);
    auto clipped = clip_convex(domain.outer(), ballpoly);
    clipped = clean_loop(std::move(clipped), 1e-12 * R);
    if (clipped.size() < 3) fail("bad-domain", "ball does not meet the domain");
    std::vector<Rect> holes;
    for (const Rect& h : domain.holes()) {
        if (h.xmax < xi.x - R || h.xmin > xi.x + R || h.ymax < xi.y - R || h.ymin > xi.y + R)
            continue;
        holes.push_back(h);
    }
    auto parent = std::make_shared<Domain2D>(domain);
    const Domain2D local =
        Domain2D::polygon(std::move(clipped), std::move(holes)).with_gamma_reference(parent);

    auto mesh = std::make_shared<TriMesh>(build_mesh(local, local_h));
    const Eigen::VectorXd load = project_load(nu_k, *mesh);

    auto eta = [&](Point x) {
        const double rho = dist(x, xi);
        return plateau + (ceiling - plateau) * smoothstep((rho - R / 2) / (R / 2));
    };
    DirichletSet bc;
    for (int n : mesh->boundary_nodes()) {
        bc.nodes.push_back(n);
        bc.values.push_back(eta(mesh->nodes()[static_cast<std::size_t>(n)]));
    }

    ScalarField u = solve_constrained(op, load, mesh, bc, cfg);

    AuxiliaryResult res{std::move(u), {}, plateau, ceiling};
    AuxiliaryCheck& chk = res.check;
    chk.range_margin = kInfinity;
    chk.decay_margin = kInfinity;
    const double slack = 1e-9 * ceiling;
    for (int i = 0; i < mesh->node_count(); ++i) {
        const Point x = mesh->nodes()[static_cast<std::size_t>(i)];
        const double v = res.u[i];
        const double m = std::min(v - (plateau - slack), 2 * ceiling + slack - v);
        if (m < chk.range_margin) {
            chk.range_margin = m;
            if (m < 0) chk.worst_point = x;
        }
        if (dist(x, xi) <= 2 * theta * R) {
            chk.decay_checked = true;
            const double dm = 0.5 * std::pow(theta * R, beta0) + slack - v;
            if (dm < chk.decay_margin) {
                chk.decay_margin = dm;
                if (dm < 0) chk.worst_point = x;
            }
        }
    }
    chk.range_ok = chk.range_margin >= 0;
    chk.decay_ok = !chk.decay_checked || chk.decay_margin >= 0;

    if (policy == AuxCheckPolicy::Throw && (!chk.range_ok || !chk.decay_ok))
        fail("aux-bound-violated",
             "local solution leaves the prescribed band near (" +
                 std::to_string(chk.worst_point.x) + ", " + std::to_string(chk.worst_point.y) +
                 ")");
    return res;
}

BarrierEngine::BarrierEngine(const Domain2D& domain, const RadonCharge& scaled_charge,
                             const EllipticOperator& op, const BarrierConfig& bcfg,
                             const SolveConfig& cfg)
    : domain_(domain), charge_(scaled_charge), op_(op), bcfg_(bcfg), cfg_(cfg) {
    bcfg_.validate();
    if (domain.gamma_empty()) fail("gamma-empty", "barrier needs nonempty gamma");
    domain_shared_ = std::make_shared<Domain2D>(domain);

    shells_.resize(static_cast<std::size_t>(bcfg_.k_max - bcfg_.k_min + 1));
    for (int k = bcfg_.k_min; k <= bcfg_.k_max; ++k) {
        const double R = std::pow(bcfg_.theta, k);
        const double spacing = 2 * bcfg_.theta * R / bcfg_.covering_overlap;
        auto& list = shells_[static_cast<std::size_t>(k - bcfg_.k_min)];
        for (const BoundaryEdge& e : domain.edges()) {
            if (!e.on_gamma) continue;
            const double len = dist(e.a, e.b);
            const int steps = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            for (int i = 0; i <= steps; ++i) {
                const Point xi = e.a + (static_cast<double>(i) / steps) * (e.b - e.a);
                // duplicates only appear where edges meet; a short tail scan
                // plus the first ball covers the closing vertex
                bool dup = false;
                const std::size_t tail = std::min<std::size_t>(list.size(), 2);
                for (std::size_t back = 0; back < tail; ++back) {
                    if (dist(list[list.size() - 1 - back].xi, xi) < 0.25 * spacing) dup = true;
                }
                if (!list.empty() && dist(list.front().xi, xi) < 0.25 * spacing) dup = true;
                if (!dup) list.push_back({xi, R});
            }
        }
    }
}

const std::vector<ShellBall>& BarrierEngine::balls(int k) const {
    return shells_[static_cast<std::size_t>(k - bcfg_.k_min)];
}

const AuxiliaryResult& BarrierEngine::ball_solution(int k, int j) {
    const auto key = std::make_pair(k, j);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    const ShellBall& b = balls(k)[static_cast<std::size_t>(j)];
    const RadonCharge nu_k =
        charge_.restricted_away_from_gamma(std::pow(bcfg_.theta, k + 2));
    AuxiliaryResult res = auxiliary_solution(
        domain_, b.xi, b.radius, nu_k, op_, bcfg_.theta, bcfg_.beta0,
        b.radius / bcfg_.local_resolution, cfg_, AuxCheckPolicy::Report);
    ++solves_;

    if (!res.check.range_ok)
        fail("aux-bound-violated",
             "shell " + std::to_string(k) + " ball " + std::to_string(j) +
                 " violates the plateau/ceiling range (margin " +
                 std::to_string(res.check.range_margin) + ")");
    if (res.check.decay_checked && !res.check.decay_ok) {
        ++decay_violations_;
        worst_decay_margin_ = std::min(worst_decay_margin_, res.check.decay_margin);
        if (bcfg_.strict_decay_check)
            fail("aux-bound-violated", "shell " + std::to_string(k) + " ball " +
                                           std::to_string(j) + " violates the inner decay bound");
    }
    return cache_.emplace(key, std::move(res)).first->second;
}

double BarrierEngine::shell_value(int k, Point x) {
    const double R = std::pow(bcfg_.theta, k);
    double v = std::pow(bcfg_.theta, k * bcfg_.beta0); // outside the covering
    const auto& list = balls(k);
    for (int j = 0; j < static_cast<int>(list.size()); ++j) {
        if (dist(x, list[static_cast<std::size_t>(j)].xi) >= R) continue;
        const AuxiliaryResult& sol = ball_solution(k, j);
        const int t = sol.u.mesh().locate(x);
        if (t < 0) continue; // grazing the rim of Ω ∩ B
        v = std::min(v, sol.u.value_at(x));
    }
    return v;
}

double BarrierEngine::value(Point x) {
    const double d = domain_.distance_to_gamma(x);
    double s = kInfinity;
    bool any = false;
    for (int k = bcfg_.k_min; k <= bcfg_.k_max; ++k) {
        if (d > std::pow(bcfg_.theta, k) * (1 + 1e-12)) continue;
        s = std::min(s, shell_value(k, x));
        any = true;
    }
    if (!any) s = shell_value(bcfg_.k_min, x);
    return s;
}

BarrierResult build_barrier(const Domain2D& domain, const RadonCharge& charge,
                            const EllipticOperator& op, const BarrierConfig& bcfg,
                            std::shared_ptr<const TriMesh> mesh, const SolveConfig& cfg) {
    bcfg.validate();
    if (!charge.nonnegative()) fail("bad-charge", "barrier needs a nonnegative charge");
    if (op.kind != EllipticOperator::Kind::PLaplacian)
        fail("unsupported-operator", "the rescaling step needs the p-Laplacian");
    if (domain.gamma_empty()) fail("gamma-empty", "barrier needs nonempty gamma");

    // rescale into the smallness regime; homogeneity undoes it afterwards
    double lambda = 1;
    if (bcfg.smallness_target >= 0) {
        const double q = charge.declared_q().value_or(kInfinity);
        const ScanSpec scan = ScanSpec::defaults(domain, mesh.get());
        const MorreyReport norm = morrey_norm(charge, q, MorreyMode::Floated, domain, scan);
        if (norm.divergent) fail("bad-charge", "floated Morrey norm diverges");
        const double target = bcfg.smallness_target > 0
                                  ? bcfg.smallness_target
                                  : std::pow(bcfg.theta, bcfg.beta0) / 80;
        if (norm.value > 0) lambda = std::pow(target, op.p - 1) / norm.value;
    }
    const double scale_back = std::pow(lambda, -1.0 / (op.p - 1));

    BarrierEngine engine(domain, lambda == 1 ? charge : charge.scaled(lambda), op, bcfg, cfg);

    BarrierResult out;
    out.rescale = lambda;

    // Barrier sampled on the global mesh. Shells narrower than the mesh pitch
    // cannot be represented nodally; the sampled field stops at the last
    // resolvable shell, the probe table below keeps the full depth.
    int k_field = bcfg.k_min;
    while (k_field < bcfg.k_max && std::pow(bcfg.theta, k_field + 1) >= mesh->spacing())
        ++k_field;
    BarrierConfig field_cfg = bcfg;
    field_cfg.k_max = std::max(bcfg.k_min + 1, k_field);
    Eigen::VectorXd s(mesh->node_count());
    for (int i = 0; i < mesh->node_count(); ++i) {
        const Point x = mesh->nodes()[static_cast<std::size_t>(i)];
        const double d = domain.distance_to_gamma(x);
        double v = kInfinity;
        bool any = false;
        for (int k = bcfg.k_min; k <= field_cfg.k_max; ++k) {
            if (d > std::pow(bcfg.theta, k) * (1 + 1e-12)) continue;
            v = std::min(v, engine.shell_value(k, x));
            any = true;
        }
        if (!any) v = engine.shell_value(bcfg.k_min, x);
        s[i] = scale_back * v;
    }
    out.s = ScalarField(mesh, std::move(s));

    // probe table along inward normals from Γ stations
    double gamma_len = 0;
    for (const BoundaryEdge& e : domain.edges())
        if (e.on_gamma) gamma_len += dist(e.a, e.b);
    const double station_spacing = gamma_len / std::max(1, bcfg.probe_stations);
    for (const BoundaryEdge& e : domain.edges()) {
        if (!e.on_gamma) continue;
        const double len = dist(e.a, e.b);
        const int nst = std::max(1, static_cast<int>(std::floor(len / station_spacing)));
        const Point tangent = (1.0 / len) * (e.b - e.a);
        Point inward{-tangent.y, tangent.x};
        const Point mid = 0.5 * (e.a + e.b);
        if (!domain.contains(mid + (0.01 * len) * inward)) inward = -1.0 * inward;
        for (int sidx = 0; sidx < nst; ++sidx) {
            const Point base = e.a + ((sidx + 0.5) / nst * len) * tangent;
            for (int k = bcfg.k_min; k <= bcfg.k_max; ++k) {
                for (int m = 0; m < bcfg.probes_per_band; ++m) {
                    const double f = (m + 0.5) / bcfg.probes_per_band;
                    const double off = std::pow(bcfg.theta, k + 1 - f);
                    const Point x = base + off * inward;
                    if (!domain.contains(x)) continue;
                    BarrierProbe probe;
                    probe.x = x;
                    probe.dist_gamma = domain.distance_to_gamma(x);
                    probe.s = scale_back * engine.value(x);
                    out.probes.push_back(probe);
                }
            }
        }
    }

    // two-sided constant and slope over the resolved band
    const double band_lo = std::pow(bcfg.theta, bcfg.k_max);
    const double band_hi = std::pow(bcfg.theta, bcfg.k_min);
    double rmin = kInfinity, rmax = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long nfit = 0;
    for (const BarrierProbe& probe : out.probes) {
        if (probe.dist_gamma < band_lo || probe.dist_gamma > band_hi) continue;
        if (!(probe.s > 0)) continue;
        const double ratio = probe.s / std::pow(probe.dist_gamma, bcfg.beta0);
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
        const double lx = std::log(probe.dist_gamma), ly = std::log(probe.s);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++nfit;
    }
    out.ratio_min = rmin;
    out.ratio_max = rmax;
    out.bound_constant = (rmin > 0 && rmax > 0) ? rmax / rmin : kInfinity;
    if (nfit >= 2) {
        const double det = nfit * sxx - sx * sx;
        out.fitted_slope = det != 0 ? (nfit * sxy - sx * sy) / det : 0;
    }

    for (int k = bcfg.k_min; k <= bcfg.k_max; ++k) out.shells.push_back(engine.balls(k));
    out.decay_violations = engine.decay_violations();
    out.worst_decay_margin = engine.worst_decay_margin();
    out.solves = engine.solves();
    return out;
}

} // namespace pplab

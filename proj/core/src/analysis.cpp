#include "pplab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pplab/quadrature.hpp"

namespace pplab {

HolderReport holder_seminorm(const ScalarField& field, double beta1, long pair_budget) {
    if (!(beta1 > 0) || !(beta1 > 0 && beta1 <= 1)) fail("bad-exponent", "beta1 must lie in (0,1]");
    const TriMesh& mesh = field.mesh();
    const auto& nodes = mesh.nodes();
    const int n = mesh.node_count();

    HolderReport rep;
    rep.beta1 = beta1;

    auto consider = [&](int i, int j) {
        const double dij = dist(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]);
        if (dij == 0) return;
        const double v = std::abs(field[i] - field[j]) / std::pow(dij, beta1);
        ++rep.pairs_scanned;
        if (v > rep.seminorm) {
            rep.seminorm = v;
            rep.witness_a = nodes[static_cast<std::size_t>(i)];
            rep.witness_b = nodes[static_cast<std::size_t>(j)];
        }
    };

    const long full_pairs = static_cast<long>(n) * (n - 1) / 2;
    if (full_pairs <= pair_budget) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) consider(i, j);
        return rep;
    }
    rep.exact = false;

    // deterministic farthest-point sample
    const int sample_size = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(pair_budget))));
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(sample_size));
    int start = 0;
    for (int i = 1; i < n; ++i) {
        const Point a = nodes[static_cast<std::size_t>(i)], b = nodes[static_cast<std::size_t>(start)];
        if (a.x < b.x || (a.x == b.x && a.y < b.y)) start = i;
    }
    std::vector<double> mind(static_cast<std::size_t>(n), kInfinity);
    chosen.push_back(start);
    for (int s = 1; s < sample_size && s < n; ++s) {
        const Point last = nodes[static_cast<std::size_t>(chosen.back())];
        int best = -1;
        double best_d = -1;
        for (int i = 0; i < n; ++i) {
            mind[static_cast<std::size_t>(i)] =
                std::min(mind[static_cast<std::size_t>(i)], dist(nodes[static_cast<std::size_t>(i)], last));
            if (mind[static_cast<std::size_t>(i)] > best_d) {
                best_d = mind[static_cast<std::size_t>(i)];
                best = i;
            }
        }
        if (best < 0 || best_d <= 0) break;
        chosen.push_back(best);
    }
    for (std::size_t a = 0; a < chosen.size(); ++a)
        for (std::size_t b = a + 1; b < chosen.size(); ++b) consider(chosen[a], chosen[b]);

    // all near pairs within 4h via spatial buckets
    const double reach = 4 * mesh.h();
    const Rect box = mesh.domain().bbox();
    const int bx = std::max(1, static_cast<int>(box.width() / reach));
    const int by = std::max(1, static_cast<int>(box.height() / reach));
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by));
    auto bin_of = [&](Point pnt) {
        const int ix = std::clamp(static_cast<int>((pnt.x - box.xmin) / reach), 0, bx - 1);
        const int iy = std::clamp(static_cast<int>((pnt.y - box.ymin) / reach), 0, by - 1);
        return std::make_pair(ix, iy);
    };
    for (int i = 0; i < n; ++i) {
        const auto [ix, iy] = bin_of(nodes[static_cast<std::size_t>(i)]);
        bins[static_cast<std::size_t>(iy) * static_cast<std::size_t>(bx) + static_cast<std::size_t>(ix)].push_back(i);
    }
    for (int i = 0; i < n; ++i) {
        const auto [ix, iy] = bin_of(nodes[static_cast<std::size_t>(i)]);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jx >= bx || jy < 0 || jy >= by) continue;
                for (int j : bins[static_cast<std::size_t>(jy) * static_cast<std::size_t>(bx) +
                                  static_cast<std::size_t>(jx)]) {
                    if (j <= i) continue;
                    if (dist(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]) <= reach)
                        consider(i, j);
                }
            }
    }
    return rep;
}

namespace {

OscillationTable oscillation_over(const ScalarField& field, Point center,
                                  const std::vector<double>& radii, bool interior_only) {
    const TriMesh& mesh = field.mesh();
    OscillationTable tab;
    double scale = std::max(1.0, field.max_abs());
    int valid = 0;
    for (double r : radii) {
        double lo = kInfinity, hi = -kInfinity;
        int count = 0;
        for (int i = 0; i < mesh.node_count(); ++i) {
            if (dist(mesh.nodes()[static_cast<std::size_t>(i)], center) > r) continue;
            lo = std::min(lo, field[i]);
            hi = std::max(hi, field[i]);
            ++count;
        }
        tab.radii.push_back(r);
        tab.osc.push_back(count > 0 ? hi - lo : 0);
        tab.node_counts.push_back(count);
        if (count >= 10) ++valid;
    }
    if (valid < 3) fail("under-resolved", "need at least 3 radii with 10 nodes each");

    bool all_flat = true;
    for (double o : tab.osc)
        if (o > 1e-14 * scale) all_flat = false;
    if (all_flat) {
        tab.flat = true;
        return tab;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (std::size_t i = 0; i < tab.radii.size(); ++i) {
        if (tab.node_counts[i] < 10 || tab.osc[i] <= 1e-14 * scale) continue;
        const double lx = std::log(tab.radii[i]), ly = std::log(tab.osc[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2) {
        const double det = m * sxx - sx * sx;
        tab.fitted_exponent = det != 0 ? (m * sxy - sx * sy) / det : 0;
    }
    (void)interior_only;
    return tab;
}

} // namespace

OscillationTable oscillation_decay(const ScalarField& field, Point center,
                                   const std::vector<double>& radii) {
    const Domain2D& dom = field.mesh().domain();
    for (double r : radii)
        if (dom.distance_to_boundary(center) < r)
            fail("bad-config", "oscillation ball leaves the domain");
    return oscillation_over(field, center, radii, true);
}

OscillationTable boundary_oscillation(const ScalarField& field, Point xi,
                                      const std::vector<double>& radii) {
    const Domain2D& dom = field.mesh().domain();
    if (dom.gamma_empty() ||
        dom.distance_to_gamma(xi) > 1e-9 * std::max(1.0, dom.diameter()))
        fail("bad-config", "boundary oscillation needs xi on gamma");
    return oscillation_over(field, xi, radii, false);
}

WolffValue wolff_potential(const RadonCharge& charge, Point x, double p, double R, int levels,
                           const Domain2D& domain) {
    if (!charge.nonnegative()) fail("bad-charge", "Wolff potential needs a nonnegative charge");
    if (!(p > 1) || !(p <= 2)) fail("bad-exponent", "p must lie in (1, 2]");
    if (levels < 1) fail("bad-exponent", "need at least one dyadic level");

    WolffValue out;
    const double tol = 1e-12 * std::max(1.0, domain.diameter());
    for (const auto& a : charge.positive().atoms) {
        if (dist(a.position, x) <= tol) out.divergent_at_atom = true;
    }

    constexpr double n = 2;
    const double ln2 = std::log(2.0);
    for (int j = 1; j <= levels; ++j) {
        const double r = R * std::pow(2.0, -j);
        const double m = ball_mass(charge, Part::Positive, x, r, domain);
        if (std::isinf(m)) {
            out.divergent_at_atom = true;
            continue;
        }
        if (m <= 0) continue;
        out.value += std::pow(m / std::pow(r, n - p), 1.0 / (p - 1)) * ln2;
    }
    return out;
}

WolffEnergyReport wolff_energy_bound(const RadonCharge& charge, double p, double q,
                                     const Domain2D& domain, const TriMesh& mesh) {
    if (!charge.nonnegative()) fail("bad-charge", "energy bound needs a nonnegative charge");
    WolffEnergyReport rep;
    const Eigen::VectorXd load = project_load(charge, mesh);
    const double R = 2 * domain.diameter();
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (load[i] <= 0) continue;
        const WolffValue w =
            wolff_potential(charge, mesh.nodes()[static_cast<std::size_t>(i)], p, R, 24, domain);
        if (w.divergent_at_atom) {
            ++rep.excluded_nodes;
            continue;
        }
        rep.lhs += load[i] * w.value;
    }
    const ScanSpec scan = ScanSpec::defaults(domain, &mesh);
    const MorreyReport norm = morrey_norm(charge, q, MorreyMode::Global, domain, scan);
    constexpr double n = 2;
    const double nq = std::isinf(q) ? 0.0 : n / q;
    rep.rhs_factor = std::pow(norm.value, p / (p - 1)) *
                     std::pow(domain.diameter(), n + (1 - nq) * p / (p - 1));
    rep.empirical_c = rep.rhs_factor > 0 ? rep.lhs / rep.rhs_factor : 0;
    return rep;
}

PiconeReport picone_check(const ScalarField& u, const ScalarField& phi, double p, double floor) {
    if (u.mesh_ptr() != phi.mesh_ptr()) fail("mesh-mismatch", "picone needs a shared mesh");
    if (!(floor > 0)) fail("picone-floor", "floor must be positive");
    const TriMesh& mesh = u.mesh();

    PiconeReport rep;
    rep.min_margin = kInfinity;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        const double pbar = (phi[v[0]] + phi[v[1]] + phi[v[2]]) / 3;
        const double ubar = (u[v[0]] + u[v[1]] + u[v[2]]) / 3;
        const bool touched = phi[v[0]] > 0 || phi[v[1]] > 0 || phi[v[2]] > 0;
        if (touched && (u[v[0]] < floor || u[v[1]] < floor || u[v[2]] < floor))
            fail("picone-floor", "u drops below the floor on the support of phi");
        const Point gu = u.gradient(t);
        const Point gp = phi.gradient(t);
        const double gun = norm(gu);
        const double rhs = std::pow(norm(gp), p);
        double lhs = 0;
        if (touched && gun > 0) {
            const double a = std::pow(gun, p - 2);
            lhs = (1 - p) * std::pow(ubar, -p) * std::pow(pbar, p) * a * gun * gun +
                  p * std::pow(ubar, 1 - p) * std::pow(pbar, p - 1) * a * dot(gu, gp);
        }
        const double margin = rhs - lhs;
        rep.scale = std::max(rep.scale, rhs);
        if (margin < rep.min_margin) rep.min_margin = margin;
        ++rep.triangles;
    }
    if (rep.triangles == 0) rep.min_margin = 0;
    return rep;
}

namespace {

double dirichlet_energy_p(const ScalarField& f, double p) {
    const TriMesh& mesh = f.mesh();
    double e = 0;
    for (int t = 0; t < mesh.tri_count(); ++t) e += mesh.tri_area(t) * std::pow(norm(f.gradient(t)), p);
    return e;
}

// ∫ φ^p dν and its nodal gradient, by component quadrature
double measure_p_pairing(const ScalarField& phi, const RadonCharge& charge, double p,
                         Eigen::VectorXd* grad) {
    const TriMesh& mesh = phi.mesh();
    const Domain2D& domain = mesh.domain();
    if (grad) grad->setZero();
    double total = 0;

    auto phi_at = [&](int t, Point x) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        const Point a = mesh.nodes()[static_cast<std::size_t>(v[0])];
        const Point b = mesh.nodes()[static_cast<std::size_t>(v[1])];
        const Point c = mesh.nodes()[static_cast<std::size_t>(v[2])];
        const double a2 = cross(b - a, c - a);
        const double w0 = cross(b - x, c - x) / a2;
        const double w1 = cross(c - x, a - x) / a2;
        const double w2 = 1 - w0 - w1;
        return std::array<double, 4>{w0, w1, w2,
                                     w0 * phi[v[0]] + w1 * phi[v[1]] + w2 * phi[v[2]]};
    };

    auto accumulate_point = [&](int t, Point x, double weight) {
        if (t < 0) return;
        const auto vals = phi_at(t, x);
        const double pv = std::max(0.0, vals[3]);
        if (pv <= 0) return;
        total += weight * std::pow(pv, p);
        if (grad) {
            const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
            const double dp = p * std::pow(pv, p - 1) * weight;
            (*grad)[v[0]] += dp * vals[0];
            (*grad)[v[1]] += dp * vals[1];
            (*grad)[v[2]] += dp * vals[2];
        }
    };

    for (const auto& d : charge.positive().densities) {
        for (int t = 0; t < mesh.tri_count(); ++t) {
            const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
            const Point a = mesh.nodes()[static_cast<std::size_t>(v[0])];
            const Point b = mesh.nodes()[static_cast<std::size_t>(v[1])];
            const Point c = mesh.nodes()[static_cast<std::size_t>(v[2])];
            const double area = mesh.tri_area(t);
            for (const TriQuadPoint& qp : triangle_rule7()) {
                const Point x = qp.l0 * a + qp.l1 * b + qp.l2 * c;
                double f = d.amplitude;
                if (d.profile == DensityProfile::CoordX) f *= x.x;
                if (d.profile == DensityProfile::CoordY) f *= x.y;
                if (d.support && !d.support->contains(x)) continue;
                if (d.gamma_exponent != 0 || d.min_gamma_dist > 0) {
                    const double dg = domain.distance_to_gamma(x);
                    if (dg <= d.min_gamma_dist) continue;
                    if (d.gamma_exponent != 0) f *= std::pow(dg, -d.gamma_exponent);
                }
                accumulate_point(t, x, qp.w * area * f);
            }
        }
    }
    for (const auto& s : charge.positive().segments) {
        const Point dv = s.b - s.a;
        const double len = norm(dv);
        const GaussRule& g = gauss_rule(8);
        const int segs = 64;
        for (int k = 0; k < segs; ++k) {
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double sp = (k + g.x[i]) / segs;
                const Point x = s.a + sp * dv;
                double f = s.rho0 + (s.rho1 - s.rho0) * sp;
                if (s.gamma_exponent != 0 || s.min_gamma_dist > 0) {
                    const double dg = domain.distance_to_gamma(x);
                    if (dg <= s.min_gamma_dist) continue;
                    if (s.gamma_exponent != 0) f *= std::pow(dg, -s.gamma_exponent);
                }
                accumulate_point(mesh.locate(x), x, g.w[i] / segs * len * f);
            }
        }
    }
    for (const auto& a : charge.positive().atoms) {
        if (a.min_gamma_dist > 0 && domain.distance_to_gamma(a.position) <= a.min_gamma_dist)
            continue;
        accumulate_point(mesh.locate(a.position), a.position, a.mass);
    }
    return total;
}

} // namespace

EmbeddingReport embedding_bounds(const RadonCharge& charge, std::shared_ptr<const TriMesh> mesh,
                                 double p, int trials, std::uint64_t seed,
                                 const SolveConfig& cfg) {
    if (!charge.nonnegative()) fail("bad-charge", "embedding bound needs a nonnegative charge");
    EmbeddingReport rep;

    const ScalarField u = solve_dirichlet(EllipticOperator::p_laplacian(p), charge, mesh, cfg);
    rep.picone_upper = std::pow(std::max(0.0, u.max_value()), (p - 1) / p);

    const int n = mesh->node_count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);

    // ascent steps are preconditioned by the p-Dirichlet operator itself
    // (inverse power iteration); every accepted step increases the objective
    SolveConfig inner;
    inner.tol_residual = 1e-9;
    inner.epsilon = 1e-6;
    inner.continuation_steps = 4;
    DirichletSet zero_bc;
    for (int b : mesh->boundary_nodes()) {
        zero_bc.nodes.push_back(b);
        zero_bc.values.push_back(0);
    }

    auto project = [&](Eigen::VectorXd& w) {
        for (int i = 0; i < n; ++i) {
            if (mesh->is_boundary_node(i)) w[i] = 0;
            if (w[i] < 0) w[i] = 0;
        }
        ScalarField f(mesh, w);
        const double e = dirichlet_energy_p(f, p);
        if (e <= 0) return false;
        w /= std::pow(e, 1.0 / p);
        return true;
    };

    Eigen::VectorXd grad(n);
    for (int trial = 0; trial < std::max(1, trials); ++trial) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = mesh->is_boundary_node(i) ? 0.0 : unif(rng);
        if (!project(v)) continue;

        double obj = measure_p_pairing(ScalarField(mesh, v), charge, p, nullptr);
        if (trial == 0) rep.ascent_trace.push_back(obj);
        for (int it = 0; it < 40; ++it) {
            measure_p_pairing(ScalarField(mesh, v), charge, p, &grad);
            if (grad.cwiseAbs().maxCoeff() <= 0) break;
            Eigen::VectorXd w = solve_constrained(EllipticOperator::p_laplacian(p), grad,
                                                  mesh, zero_bc, inner)
                                    .values();
            if (!project(w)) break;
            bool improved = false;
            for (int blend = 0; blend < 6; ++blend) {
                Eigen::VectorXd cand = w;
                if (!project(cand)) break;
                const double next = measure_p_pairing(ScalarField(mesh, cand), charge, p, nullptr);
                if (next > obj * (1 + 1e-11)) {
                    v = std::move(cand);
                    obj = next;
                    improved = true;
                    if (trial == 0) rep.ascent_trace.push_back(obj);
                    break;
                }
                w = 0.5 * (w + v); // halve the move toward the current iterate
            }
            if (!improved) break;
        }
        rep.rayleigh_lower = std::max(rep.rayleigh_lower, std::pow(obj, 1.0 / p));
    }
    rep.gap = rep.picone_upper - rep.rayleigh_lower;
    rep.consistent = rep.rayleigh_lower <= rep.picone_upper * 1.05 + 1e-12;
    return rep;
}

double necessity_exponent(double beta, double p, int n) {
    const double bp = beta * (p - 1);
    if (!(bp < n)) fail("q-undefined", "beta (p-1) must stay below n");
    // exact arithmetic when β(p-1) is a small rational k/m
    for (int den = 1; den <= 64; ++den) {
        const double num = bp * den;
        const double rounded = std::round(num);
        if (std::abs(num - rounded) < 1e-12 && rounded >= 0) {
            return static_cast<double>(n) * den / (n * den - rounded);
        }
    }
    return n / (n - bp);
}

NecessityReport necessity_check(const ScalarField& u, const RadonCharge& charge, double beta,
                                double p, const Domain2D& domain) {
    if (!charge.nonnegative()) fail("bad-charge", "necessity check needs a nonnegative charge");
    NecessityReport rep;
    rep.beta = beta;
    rep.q = necessity_exponent(beta, p);

    const Domain2D full = domain.with_full_gamma();
    const ScanSpec scan = ScanSpec::defaults(full, &u.mesh());
    const MorreyReport norm = morrey_norm(charge, rep.q, MorreyMode::Floated, full, scan);
    rep.norm_lhs = std::pow(norm.value, 1.0 / (p - 1));
    rep.holder_rhs = holder_seminorm(u, beta).seminorm;
    rep.empirical_c = rep.holder_rhs > 0 ? rep.norm_lhs / rep.holder_rhs : 0;
    return rep;
}

} // namespace pplab

#include "pplab/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace pplab {

EllipticOperator EllipticOperator::p_laplacian(double p) {
    if (!(p > 1) || !(p <= 2)) fail("bad-operator", "p must lie in (1, 2]");
    EllipticOperator op;
    op.p = p;
    op.L = 1;
    op.kind = Kind::PLaplacian;
    return op;
}

EllipticOperator EllipticOperator::weighted(double p, double L, std::function<double(Point)> a) {
    if (!(p > 1) || !(p <= 2)) fail("bad-operator", "p must lie in (1, 2]");
    if (!(L >= 1)) fail("bad-operator", "L must be >= 1");
    EllipticOperator op;
    op.p = p;
    op.L = L;
    op.kind = Kind::Weighted;
    op.weight = std::move(a);
    return op;
}

EllipticOperator EllipticOperator::custom(double p, double L,
                                          std::function<Point(Point, Point)> A) {
    EllipticOperator op;
    op.p = p;
    op.L = L;
    op.kind = Kind::Custom;
    op.custom_flux = std::move(A);
    return op;
}

ScalarField::ScalarField(std::shared_ptr<const TriMesh> mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_->node_count()) fail("mesh-mismatch", "field size != node count");
    grads_.resize(static_cast<std::size_t>(mesh_->tri_count()));
    for (int t = 0; t < mesh_->tri_count(); ++t) {
        const auto& v = mesh_->triangles()[static_cast<std::size_t>(t)].v;
        Point g{0, 0};
        for (int k = 0; k < 3; ++k) {
            const Point b = mesh_->basis_gradient(t, k);
            g = g + values_[v[static_cast<std::size_t>(k)]] * b;
        }
        grads_[static_cast<std::size_t>(t)] = g;
    }
}

double ScalarField::p_energy(const EllipticOperator& op) const {
    double e = 0;
    for (int t = 0; t < mesh_->tri_count(); ++t) {
        const Point g = grads_[static_cast<std::size_t>(t)];
        const double gn = norm(g);
        const auto& v = mesh_->triangles()[static_cast<std::size_t>(t)].v;
        const Point centroid = (1.0 / 3) * (mesh_->nodes()[static_cast<std::size_t>(v[0])] +
                                            mesh_->nodes()[static_cast<std::size_t>(v[1])] +
                                            mesh_->nodes()[static_cast<std::size_t>(v[2])]);
        e += mesh_->tri_area(t) * op.weight_at(centroid) * std::pow(gn, op.p);
    }
    return e;
}

namespace {

struct AssemblyScratch {
    std::vector<double> weight;    // a(x) per triangle
    std::vector<int> free_index;   // node -> free slot or -1
    std::vector<int> free_nodes;   // slot -> node
};

AssemblyScratch prepare(const EllipticOperator& op, const TriMesh& mesh, const DirichletSet& bc) {
    AssemblyScratch s;
    s.weight.resize(static_cast<std::size_t>(mesh.tri_count()));
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        const Point centroid = (1.0 / 3) * (mesh.nodes()[static_cast<std::size_t>(v[0])] +
                                            mesh.nodes()[static_cast<std::size_t>(v[1])] +
                                            mesh.nodes()[static_cast<std::size_t>(v[2])]);
        const double a = op.weight_at(centroid);
        if (op.kind == EllipticOperator::Kind::Weighted &&
            (a < 1 - 1e-12 || a > op.L + 1e-12))
            fail("bad-operator", "weight violates 1 <= a(x) <= L");
        s.weight[static_cast<std::size_t>(t)] = a;
    }
    s.free_index.assign(static_cast<std::size_t>(mesh.node_count()), -2);
    for (int n : bc.nodes) s.free_index[static_cast<std::size_t>(n)] = -1;
    int slot = 0;
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (s.free_index[static_cast<std::size_t>(i)] == -2) {
            s.free_index[static_cast<std::size_t>(i)] = slot++;
            s.free_nodes.push_back(i);
        }
    }
    return s;
}

double objective(const TriMesh& mesh, const AssemblyScratch& sc, double p, double eps,
                 const Eigen::VectorXd& load, const Eigen::VectorXd& u) {
    double J = 0;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        Point g{0, 0};
        for (int k = 0; k < 3; ++k)
            g = g + u[v[static_cast<std::size_t>(k)]] * mesh.basis_gradient(t, k);
        const double s2 = dot(g, g) + eps * eps;
        J += mesh.tri_area(t) * sc.weight[static_cast<std::size_t>(t)] * std::pow(s2, p / 2) / p;
    }
    return J - load.dot(u);
}

} // namespace

double energy_objective(const EllipticOperator& op, const TriMesh& mesh,
                        const Eigen::VectorXd& values, double eps, const Eigen::VectorXd& load) {
    AssemblyScratch sc = prepare(op, mesh, {});
    return objective(mesh, sc, op.p, eps, load, values);
}

Eigen::VectorXd energy_gradient(const EllipticOperator& op, const TriMesh& mesh,
                                const Eigen::VectorXd& values, double eps,
                                const Eigen::VectorXd& load) {
    AssemblyScratch sc = prepare(op, mesh, {});
    Eigen::VectorXd grad = -load;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        Point g{0, 0};
        for (int k = 0; k < 3; ++k)
            g = g + values[v[static_cast<std::size_t>(k)]] * mesh.basis_gradient(t, k);
        const double s2 = dot(g, g) + eps * eps;
        const double f1 = sc.weight[static_cast<std::size_t>(t)] * mesh.tri_area(t) *
                          std::pow(s2, op.p / 2 - 1);
        for (int k = 0; k < 3; ++k)
            grad[v[static_cast<std::size_t>(k)]] += f1 * dot(g, mesh.basis_gradient(t, k));
    }
    return grad;
}

ScalarField solve_constrained(const EllipticOperator& op, const Eigen::VectorXd& load,
                              std::shared_ptr<const TriMesh> mesh_ptr, const DirichletSet& bc,
                              const SolveConfig& cfg) {
    if (op.kind == EllipticOperator::Kind::Custom)
        fail("unsupported-operator", "only potential-type operators can be solved");
    const TriMesh& mesh = *mesh_ptr;
    if (load.size() != mesh.node_count()) fail("mesh-mismatch", "load size != node count");
    if (bc.nodes.size() != bc.values.size()) fail("mesh-mismatch", "dirichlet set mismatch");
    const double p = op.p;

    AssemblyScratch sc = prepare(op, mesh, bc);
    const int nfree = static_cast<int>(sc.free_nodes.size());

    Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.node_count());
    for (std::size_t i = 0; i < bc.nodes.size(); ++i) u[bc.nodes[i]] = bc.values[i];

    SolveMeta meta;
    meta.epsilon = cfg.epsilon;

    if (nfree == 0) {
        ScalarField f(mesh_ptr, std::move(u));
        meta.converged = true;
        f.meta = meta;
        return f;
    }

    // ε-continuation schedule (single stage when p = 2: the problem is linear)
    std::vector<double> stages;
    if (p == 2) {
        stages.push_back(cfg.epsilon);
    } else {
        const int ns = std::max(1, cfg.continuation_steps);
        const double e0 = std::max(cfg.eps_start, cfg.epsilon);
        for (int s = 0; s < ns; ++s) {
            const double f = ns == 1 ? 1.0 : static_cast<double>(s) / (ns - 1);
            stages.push_back(e0 * std::pow(cfg.epsilon / e0, f));
        }
    }

    Eigen::SparseMatrix<double> H(nfree, nfree);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd grad(nfree);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool pattern_analyzed = false;

    int total_iter = 0;
    double res = std::numeric_limits<double>::max();

    for (std::size_t stage = 0; stage < stages.size(); ++stage) {
        const double eps = stages[stage];
        const bool final_stage = stage + 1 == stages.size();
        const double stage_tol =
            final_stage ? cfg.tol_residual
                        : std::max(cfg.tol_residual, 1e-6 * (1.0 + load.cwiseAbs().maxCoeff()));

        for (;;) {
            // assemble gradient and Hessian at u
            grad.setZero();
            trip.clear();
            for (int t = 0; t < mesh.tri_count(); ++t) {
                const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
                Point g{0, 0};
                for (int k = 0; k < 3; ++k)
                    g = g + u[v[static_cast<std::size_t>(k)]] * mesh.basis_gradient(t, k);
                const double s2 = dot(g, g) + eps * eps;
                const double area = mesh.tri_area(t);
                const double w = sc.weight[static_cast<std::size_t>(t)];
                const double f1 = w * area * std::pow(s2, p / 2 - 1);
                const double f2 = w * area * (p - 2) * std::pow(s2, p / 2 - 2);
                for (int i = 0; i < 3; ++i) {
                    const int ni = v[static_cast<std::size_t>(i)];
                    const int fi = sc.free_index[static_cast<std::size_t>(ni)];
                    const Point bi = mesh.basis_gradient(t, i);
                    if (fi >= 0) grad[fi] += f1 * dot(g, bi);
                    for (int j = 0; j < 3 && fi >= 0; ++j) {
                        const int nj = v[static_cast<std::size_t>(j)];
                        const int fj = sc.free_index[static_cast<std::size_t>(nj)];
                        if (fj < 0) continue;
                        const Point bj = mesh.basis_gradient(t, j);
                        const double hij = f1 * dot(bi, bj) + f2 * dot(g, bi) * dot(g, bj);
                        trip.emplace_back(fi, fj, hij);
                    }
                }
            }
            for (int i = 0; i < nfree; ++i) grad[i] -= load[sc.free_nodes[static_cast<std::size_t>(i)]];

            res = grad.cwiseAbs().maxCoeff();
            if (res <= stage_tol) break;
            if (total_iter >= cfg.max_newton)
                fail("solver-stall",
                     "no convergence after " + std::to_string(total_iter) +
                         " Newton steps (residual " + std::to_string(res) + ")");

            H.setFromTriplets(trip.begin(), trip.end());
            if (!pattern_analyzed) {
                ldlt.analyzePattern(H);
                pattern_analyzed = true;
            }
            ldlt.factorize(H);
            if (ldlt.info() != Eigen::Success)
                fail("solver-stall", "Hessian factorization failed");
            const Eigen::VectorXd d = ldlt.solve(-grad);

            const double slope = grad.dot(d); // negative for a descent direction
            const double J0 = objective(mesh, sc, p, eps, load, u);

            // Once the Newton decrement falls below what the objective can
            // resolve in double precision, damping is unmeasurable; take the
            // pure Newton step (we are inside the quadratic basin).
            if (-slope <= 1e-12 * (1 + std::abs(J0))) {
                for (int i = 0; i < nfree; ++i)
                    u[sc.free_nodes[static_cast<std::size_t>(i)]] += d[i];
                if (cfg.record_energy)
                    meta.energy_trace.push_back(objective(mesh, sc, p, eps, load, u));
                ++total_iter;
                continue;
            }

            double alpha = 1;
            Eigen::VectorXd u_try = u;
            bool accepted = false;
            for (int ls = 0; ls < 50; ++ls) {
                for (int i = 0; i < nfree; ++i)
                    u_try[sc.free_nodes[static_cast<std::size_t>(i)]] =
                        u[sc.free_nodes[static_cast<std::size_t>(i)]] + alpha * d[i];
                const double J1 = objective(mesh, sc, p, eps, load, u_try);
                if (J1 <= J0 + 1e-4 * alpha * slope) {
                    u = u_try;
                    if (cfg.record_energy) meta.energy_trace.push_back(J1);
                    accepted = true;
                    break;
                }
                alpha /= 2;
            }
            if (!accepted)
                fail("solver-stall", "line search failed (residual " + std::to_string(res) + ")");
            ++total_iter;
        }
    }

    meta.iterations = total_iter;
    meta.residual = res;
    meta.energy = objective(mesh, sc, p, stages.back(), load, u);
    meta.converged = res <= cfg.tol_residual;
    if (!meta.converged)
        fail("solver-stall", "final residual " + std::to_string(res) + " above tolerance");

    ScalarField f(mesh_ptr, std::move(u));
    f.meta = meta;
    return f;
}

ScalarField solve_dirichlet(const EllipticOperator& op, const RadonCharge& charge,
                            std::shared_ptr<const TriMesh> mesh,
                            const std::function<double(Point)>& boundary_data,
                            const SolveConfig& cfg) {
    const Eigen::VectorXd load = project_load(charge, *mesh);
    DirichletSet bc;
    bc.nodes = mesh->boundary_nodes();
    bc.values.reserve(bc.nodes.size());
    for (int n : bc.nodes)
        bc.values.push_back(boundary_data(mesh->nodes()[static_cast<std::size_t>(n)]));
    return solve_constrained(op, load, std::move(mesh), bc, cfg);
}

ScalarField solve_dirichlet(const EllipticOperator& op, const RadonCharge& charge,
                            std::shared_ptr<const TriMesh> mesh, const SolveConfig& cfg) {
    return solve_dirichlet(op, charge, std::move(mesh), [](Point) { return 0.0; }, cfg);
}

ScalarField glue_min(const ScalarField& u1, const ScalarField& u2) {
    if (u1.mesh_ptr() != u2.mesh_ptr()) fail("mesh-mismatch", "glue_min needs a shared mesh");
    Eigen::VectorXd v = u1.values().cwiseMin(u2.values());
    ScalarField out(u1.mesh_ptr(), std::move(v));
    return out;
}

Eigen::VectorXd supersolution_residuals(const EllipticOperator& op, const ScalarField& field,
                                        const RadonCharge& charge) {
    const TriMesh& mesh = field.mesh();
    const Eigen::VectorXd load = project_load(charge, mesh);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.node_count());
    const double p = op.p;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& v = mesh.triangles()[static_cast<std::size_t>(t)].v;
        const Point g = field.gradient(t);
        const double gn = norm(g);
        if (gn == 0) continue;
        const Point centroid = (1.0 / 3) * (mesh.nodes()[static_cast<std::size_t>(v[0])] +
                                            mesh.nodes()[static_cast<std::size_t>(v[1])] +
                                            mesh.nodes()[static_cast<std::size_t>(v[2])]);
        const double coef = op.weight_at(centroid) * mesh.tri_area(t) * std::pow(gn, p - 2);
        for (int k = 0; k < 3; ++k)
            r[v[static_cast<std::size_t>(k)]] += coef * dot(g, mesh.basis_gradient(t, k));
    }
    const auto& interior = mesh.interior_nodes();
    Eigen::VectorXd out(static_cast<long>(interior.size()));
    for (std::size_t i = 0; i < interior.size(); ++i)
        out[static_cast<long>(i)] = r[interior[i]] - load[interior[i]];
    return out;
}

double supersolution_residual(const EllipticOperator& op, const ScalarField& field,
                              const RadonCharge& charge) {
    const Eigen::VectorXd r = supersolution_residuals(op, field, charge);
    return r.size() == 0 ? 0.0 : r.minCoeff();
}

ComparisonResult comparison_check(const ScalarField& u, const ScalarField& v, double tol) {
    if (u.mesh_ptr() != v.mesh_ptr()) fail("mesh-mismatch", "comparison needs a shared mesh");
    ComparisonResult res;
    res.max_violation = (u.values() - v.values()).maxCoeff();
    res.ok = res.max_violation <= tol;
    return res;
}

double homogeneity_check(const EllipticOperator& op, const RadonCharge& charge,
                         std::shared_ptr<const TriMesh> mesh, double t,
                         const SolveConfig& cfg) {
    if (!(t > 0)) fail("bad-charge", "scale factor must be positive");
    const double lambda = std::pow(t, 1.0 / (op.p - 1));
    const ScalarField u1 = solve_dirichlet(op, charge, mesh, cfg);
    SolveConfig cfg2 = cfg;
    cfg2.epsilon *= lambda;
    cfg2.eps_start *= lambda;
    const ScalarField u2 = solve_dirichlet(op, charge.scaled(t), mesh, cfg2);
    return (u2.values() - lambda * u1.values()).cwiseAbs().maxCoeff();
}

} // namespace pplab

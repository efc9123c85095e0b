#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pplab/measure.hpp"
#include "pplab/mesh.hpp"

namespace pplab {

// A(x,z) of p-Laplacian type. Built-ins are potential operators so Dirichlet
// problems are convex minimizations; a general flux callback can be stored
// but is rejected by the solver.
struct EllipticOperator {
    enum class Kind { PLaplacian, Weighted, Custom };

    double p = 2;
    double L = 1;
    Kind kind = Kind::PLaplacian;
    std::function<double(Point)> weight;               // Weighted: A = a(x)|z|^{p-2}z
    std::function<Point(Point, Point)> custom_flux;    // accepted, never solved

    static EllipticOperator p_laplacian(double p);
    static EllipticOperator weighted(double p, double L, std::function<double(Point)> a);
    static EllipticOperator custom(double p, double L, std::function<Point(Point, Point)> A);

    double weight_at(Point x) const { return kind == Kind::Weighted ? weight(x) : 1.0; }
};

struct SolveMeta {
    double energy = 0;        // final regularized objective
    double residual = 0;      // max-norm of the free-node gradient
    int iterations = 0;
    double epsilon = 0;       // final regularization scale
    bool converged = false;
    std::vector<double> energy_trace; // objective after each accepted step
};

class ScalarField {
public:
    ScalarField(std::shared_ptr<const TriMesh> mesh, Eigen::VectorXd values);

    const TriMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
    const Eigen::VectorXd& values() const { return values_; }
    double operator[](int i) const { return values_[i]; }
    int size() const { return static_cast<int>(values_.size()); }

    Point gradient(int tri) const { return grads_[static_cast<std::size_t>(tri)]; }
    double value_at(Point x) const { return mesh_->interpolate(values_, x); }

    double min_value() const { return values_.minCoeff(); }
    double max_value() const { return values_.maxCoeff(); }
    double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

    // ∫ a(x) |∇u|^p dx (unregularized)
    double p_energy(const EllipticOperator& op) const;

    SolveMeta meta;

private:
    std::shared_ptr<const TriMesh> mesh_;
    Eigen::VectorXd values_;
    std::vector<Point> grads_;
};

struct SolveConfig {
    double epsilon = 1e-8;       // final gradient regularization scale
    double eps_start = 1e-2;     // first continuation stage
    int continuation_steps = 7;  // geometric stages from eps_start to epsilon
    double tol_residual = 1e-10; // max-norm stopping tolerance
    int max_newton = 200;        // total iteration cap
    bool record_energy = false;
};

struct DirichletSet {
    std::vector<int> nodes;
    std::vector<double> values;
};

// Minimize  Σ_T a(x) (|∇u|² + ε²)^{p/2} area / p − load·u  subject to the
// Dirichlet constraints, by damped Newton with ε-continuation.
ScalarField solve_constrained(const EllipticOperator& op, const Eigen::VectorXd& load,
                              std::shared_ptr<const TriMesh> mesh, const DirichletSet& bc,
                              const SolveConfig& cfg = {});

// Regularized objective and its nodal gradient (all nodes), for diagnostics
// and derivative tests.
double energy_objective(const EllipticOperator& op, const TriMesh& mesh,
                        const Eigen::VectorXd& values, double eps, const Eigen::VectorXd& load);
Eigen::VectorXd energy_gradient(const EllipticOperator& op, const TriMesh& mesh,
                                const Eigen::VectorXd& values, double eps,
                                const Eigen::VectorXd& load);

// Dirichlet solve of -div A(x,∇u) = ν with prescribed values on ∂Ω.
ScalarField solve_dirichlet(const EllipticOperator& op, const RadonCharge& charge,
                            std::shared_ptr<const TriMesh> mesh,
                            const std::function<double(Point)>& boundary_data,
                            const SolveConfig& cfg = {});
ScalarField solve_dirichlet(const EllipticOperator& op, const RadonCharge& charge,
                            std::shared_ptr<const TriMesh> mesh, const SolveConfig& cfg = {});

// Nodal minimum of two fields on the same mesh.
ScalarField glue_min(const ScalarField& u1, const ScalarField& u2);

// Per-interior-node residuals  ∫A(x,∇u)·∇φ_i − ∫φ_i dν  (unregularized flux).
Eigen::VectorXd supersolution_residuals(const EllipticOperator& op, const ScalarField& field,
                                        const RadonCharge& charge);
// Minimum entry of the above; ≥ -tol certifies a discrete supersolution.
double supersolution_residual(const EllipticOperator& op, const ScalarField& field,
                              const RadonCharge& charge);

struct ComparisonResult {
    bool ok = false;
    double max_violation = 0; // max(u - v)
};
ComparisonResult comparison_check(const ScalarField& u, const ScalarField& v, double tol);

// max node |solve(t·ν) − t^{1/(p−1)}·solve(ν)| with consistently scaled ε.
double homogeneity_check(const EllipticOperator& op, const RadonCharge& charge,
                         std::shared_ptr<const TriMesh> mesh, double t,
                         const SolveConfig& cfg = {});

} // namespace pplab

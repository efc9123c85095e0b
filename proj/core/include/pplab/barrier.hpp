#pragma once

#include <map>
#include <optional>

#include "pplab/capacity.hpp"
#include "pplab/solver.hpp"

namespace pplab {

// Shell-and-patch construction of a positive supersolution s ≍ δ_Γ^{β₀}.
struct BarrierConfig {
    double theta = 0.25;  // shell contraction ratio
    double beta0 = 0.25;  // target boundary growth exponent
    int k_min = 0;
    int k_max = 4;
    double covering_overlap = 1.5; // >= 1; tighter spacing of covering balls
    // ‖λν‖^{1/(p-1)} rescale target before patching; 0 = theta^{beta0} / 80
    double smallness_target = 0;
    int local_resolution = 24; // mesh cells across a covering-ball radius
    // The inner decay bound on 2θB only holds for small θ; by default its
    // violations are counted and reported instead of aborting the build.
    bool strict_decay_check = false;
    int probe_stations = 48;
    int probes_per_band = 3;

    void validate() const;
    // θ^{-β₀} > 8 guarantees that patches of well separated shells are
    // strictly ordered; larger θ still yields a usable barrier.
    bool ordering_guaranteed() const { return std::pow(theta, beta0) < 1.0 / 8.0; }
};

struct AuxiliaryCheck {
    bool range_ok = true;    // plateau/ceiling bounds on Ω ∩ B
    double range_margin = 0; // min slack, negative on violation
    bool decay_checked = false;
    bool decay_ok = true;    // u ≤ (1/2)(θR)^{β₀} on Ω ∩ 2θB
    double decay_margin = 0;
    Point worst_point{};
};

struct AuxiliaryResult {
    ScalarField u;
    AuxiliaryCheck check;
    double plateau = 0; // (1/4)(θR)^{β₀}
    double ceiling = 0; // R^{β₀}
};

enum class AuxCheckPolicy { Throw, Report };

// Local Dirichlet solve on Ω ∩ B(ξ,R) with smoothstep transition data between
// the plateau value on B/2 and the outer value on ∂B.
AuxiliaryResult auxiliary_solution(const Domain2D& domain, Point xi, double R,
                                   const RadonCharge& nu_k, const EllipticOperator& op,
                                   double theta, double beta0, double local_h,
                                   const SolveConfig& cfg = {},
                                   AuxCheckPolicy policy = AuxCheckPolicy::Throw);

struct ShellBall {
    Point xi;
    double radius = 0;
};

struct BarrierProbe {
    Point x;
    double dist_gamma = 0;
    double s = 0;
};

struct BarrierResult {
    std::optional<ScalarField> s; // barrier sampled on the global mesh
    std::vector<std::vector<ShellBall>> shells; // per k, k_min first
    std::vector<BarrierProbe> probes;

    double bound_constant = 0; // max ratio over min ratio of s/δ^{β₀} in band
    double ratio_min = 0, ratio_max = 0;
    double fitted_slope = 0;   // least squares slope of log s vs log δ
    int decay_violations = 0;
    double worst_decay_margin = 0;
    double rescale = 1;        // λ applied to ν before patching
    int solves = 0;            // local problems actually solved
};

BarrierResult build_barrier(const Domain2D& domain, const RadonCharge& charge,
                            const EllipticOperator& op, const BarrierConfig& bcfg,
                            std::shared_ptr<const TriMesh> mesh,
                            const SolveConfig& cfg = {});

// Lazy evaluator for the patched barrier; exposed for tests that probe v_k
// directly without a global mesh.
class BarrierEngine {
public:
    BarrierEngine(const Domain2D& domain, const RadonCharge& scaled_charge,
                  const EllipticOperator& op, const BarrierConfig& bcfg,
                  const SolveConfig& cfg = {});

    // v_k(x) = min(θ^{kβ₀}, min over covering balls containing x)
    double shell_value(int k, Point x);
    // s(x) = inf_{k: δ_Γ(x) ≤ θ^k} v_k(x)   (before any rescale)
    double value(Point x);

    const std::vector<ShellBall>& balls(int k) const;
    const AuxiliaryResult& ball_solution(int k, int j); // solves on demand
    int solves() const { return solves_; }
    int decay_violations() const { return decay_violations_; }
    double worst_decay_margin() const { return worst_decay_margin_; }

private:
    const Domain2D& domain_;
    RadonCharge charge_;
    EllipticOperator op_;
    BarrierConfig bcfg_;
    SolveConfig cfg_;
    std::shared_ptr<const Domain2D> domain_shared_;
    std::vector<std::vector<ShellBall>> shells_;
    std::map<std::pair<int, int>, AuxiliaryResult> cache_;
    int solves_ = 0;
    int decay_violations_ = 0;
    double worst_decay_margin_ = 0;
};

} // namespace pplab

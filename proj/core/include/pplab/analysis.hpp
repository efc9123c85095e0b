#pragma once

#include <cstdint>

#include "pplab/solver.hpp"

namespace pplab {

struct HolderReport {
    double beta1 = 0;
    double seminorm = 0;
    Point witness_a{}, witness_b{};
    long pairs_scanned = 0;
    bool exact = true; // all pairs visited (within budget)
};

// sup |u(x)-u(y)| / |x-y|^{β₁} over node pairs. Exhaustive when the pair
// count fits the budget, otherwise a deterministic farthest-point sample
// plus every near pair with |x-y| <= 4h.
HolderReport holder_seminorm(const ScalarField& field, double beta1,
                             long pair_budget = 8'000'000);

struct OscillationTable {
    std::vector<double> radii;
    std::vector<double> osc;
    std::vector<int> node_counts;
    double fitted_exponent = 0;
    bool flat = false;
};

// Oscillation over nodes in interior balls, with a log-log slope fit.
OscillationTable oscillation_decay(const ScalarField& field, Point center,
                                   const std::vector<double>& radii);
// Oscillation over Ω ∩ B(ξ, r) for ξ ∈ Γ; no fit, consumers compare decades.
OscillationTable boundary_oscillation(const ScalarField& field, Point xi,
                                      const std::vector<double>& radii);

struct WolffValue {
    double value = 0;
    bool divergent_at_atom = false;
};

// Dyadic lower sum of ∫_0^R (μ(B(x,r))/r^{n-p})^{1/(p-1)} dr/r with `levels`
// dyadic intervals; nondecreasing in `levels`.
WolffValue wolff_potential(const RadonCharge& charge, Point x, double p, double R,
                           int levels, const Domain2D& domain);

struct WolffEnergyReport {
    double lhs = 0;        // ∫ W dν over the node sample
    double rhs_factor = 0; // ‖ν‖^{p/(p-1)} diam^{n + (1-n/q) p/(p-1)}
    double empirical_c = 0;
    int excluded_nodes = 0;
};

WolffEnergyReport wolff_energy_bound(const RadonCharge& charge, double p, double q,
                                     const Domain2D& domain, const TriMesh& mesh);

struct PiconeReport {
    double min_margin = 0; // min over triangles of rhs - lhs
    int triangles = 0;
    double scale = 0;      // max |∇φ|^p, for relative tolerances
};

// Per-triangle check of |∇u|^{p-2}∇u·∇(u^{1-p}φ^p) ≤ |∇φ|^p with P1
// gradients and triangle-averaged values.
PiconeReport picone_check(const ScalarField& u, const ScalarField& phi, double p,
                          double floor = 1e-12);

struct EmbeddingReport {
    double rayleigh_lower = 0; // max ‖φ‖_{L^p(ν)} over the unit p-Dirichlet sphere
    double picone_upper = 0;   // ‖u‖_∞^{(p-1)/p} from the solve of -Δ_p u = ν
    double gap = 0;
    bool consistent = true;    // lower <= upper * 1.05
    std::vector<double> ascent_trace;
};

EmbeddingReport embedding_bounds(const RadonCharge& charge, std::shared_ptr<const TriMesh> mesh,
                                 double p, int trials, std::uint64_t seed = 2024,
                                 const SolveConfig& cfg = {});

struct NecessityReport {
    double q = 0;
    double norm_lhs = 0;    // scanned ‖ν‖^{1/(p-1)} floated from ∂Ω
    double holder_rhs = 0;  // [u]_β
    double empirical_c = 0; // lhs / rhs
    double beta = 0;
};

// q = n / (n - β(p-1)); exact integer arithmetic when β(p-1) is a small
// fraction, floating point otherwise.
double necessity_exponent(double beta, double p, int n = 2);

NecessityReport necessity_check(const ScalarField& u, const RadonCharge& charge, double beta,
                                double p, const Domain2D& domain);

} // namespace pplab

#pragma once

#include <functional>
#include <optional>

#include "pplab/solver.hpp"

namespace pplab {

// Closed condenser set given as a simple polygon (disks enter as inscribed
// regular 2^k-gons).
class Compact2D {
public:
    static Compact2D polygon(std::vector<Point> pts);
    static Compact2D disk(Point center, double radius, int ngon = 256);
    static Compact2D empty() { return Compact2D{}; }

    bool is_empty() const { return pts_.empty(); }
    const std::vector<Point>& points() const { return pts_; }
    bool contains(Point p) const; // closed containment
    bool intersects_triangle(Point a, Point b, Point c) const;
    Rect bbox() const { return bbox_; }

private:
    std::vector<Point> pts_;
    Rect bbox_;
};

struct CapacityReport {
    double value = 0;
    std::optional<ScalarField> minimizer;
    double mesh_h = 0;
    double p = 2;
    int constrained_nodes = 0;
};

enum class CondenserConstraint {
    CoverTriangles, // u = 1 on every node of a triangle meeting K: conforming
                    // upper bound for cap_p(K, U)
    NodesOnly       // u = 1 only on nodes inside K
};

// Discrete relative p-capacity of (K, U) by energy minimization.
CapacityReport capacity(const Compact2D& K, const Domain2D& U, double p, double target_h,
                        CondenserConstraint mode = CondenserConstraint::CoverTriangles,
                        const SolveConfig& cfg = {});

// Membership-predicate condenser (used by the CDC scan where K = B̄(ξ,R)∖Ω).
CapacityReport capacity_region(const std::function<bool(Point)>& k_contains, const Domain2D& U,
                               double p, double target_h, const SolveConfig& cfg = {});

struct CdcSample {
    Point xi;
    double R = 0;
    double numerator = 0;
    double denominator = 0;
    double ratio = 0;
    bool under_resolved = false;
};

struct CdcReport {
    double gamma_estimate = 0; // min ratio over resolved samples
    std::vector<CdcSample> samples;
};

// Capacity density condition scan over sampled ξ ∈ Γ and the given radii.
CdcReport cdc_check(const Domain2D& domain, double p, const std::vector<double>& radii,
                    int boundary_samples, const SolveConfig& cfg = {});

} // namespace pplab

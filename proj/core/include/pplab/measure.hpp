#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pplab/geometry.hpp"
#include "pplab/mesh.hpp"

namespace pplab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class DensityProfile { Constant, CoordX, CoordY };

// Absolutely continuous component: amplitude * profile(x) * 1_support(x)
// * 1_{δ_Γ(x) > min_gamma_dist} * δ_Γ(x)^{-gamma_exponent}, on Ω.
struct DensityComponent {
    double amplitude = 1;
    DensityProfile profile = DensityProfile::Constant;
    std::optional<Rect> support;
    double gamma_exponent = 0;
    double min_gamma_dist = 0;
};

// H^1 restricted to the segment [a,b] with linear density rho0 -> rho1,
// optionally weighted by δ_Γ^{-gamma_exponent} and cut at min_gamma_dist.
struct SegmentComponent {
    Point a, b;
    double rho0 = 1, rho1 = 1;
    double gamma_exponent = 0;
    double min_gamma_dist = 0;
};

struct AtomComponent {
    Point position;
    double mass = 1;
    double min_gamma_dist = 0;
};

struct ChargePart {
    std::vector<DensityComponent> densities;
    std::vector<SegmentComponent> segments;
    std::vector<AtomComponent> atoms;

    bool empty() const { return densities.empty() && segments.empty() && atoms.empty(); }
    bool has_atoms() const { return !atoms.empty(); }
};

// Signed charge ν = ν₊ − ν₋ given by analytic descriptors. The two parts are
// mutually singular by construction: components are never shared.
class RadonCharge {
public:
    RadonCharge() = default;

    static RadonCharge zero() { return {}; }
    static RadonCharge lebesgue(double c = 1);
    static RadonCharge density(DensityComponent d);
    static RadonCharge segment(Point a, Point b, double rho0 = 1, double rho1 = -1);
    static RadonCharge atom(Point x, double mass);

    RadonCharge& add(DensityComponent d, bool negative = false);
    RadonCharge& add(SegmentComponent s, bool negative = false);
    RadonCharge& add(AtomComponent a, bool negative = false);

    const ChargePart& positive() const { return pos_; }
    const ChargePart& negative() const { return neg_; }
    bool nonnegative() const { return neg_.empty(); }
    bool has_atoms() const { return pos_.has_atoms() || neg_.has_atoms(); }
    double max_gamma_exponent() const;

    // c > 0 scales every component amplitude.
    RadonCharge scaled(double c) const;
    // 1_{δ_Γ > cut} ν
    RadonCharge restricted_away_from_gamma(double cut) const;
    RadonCharge operator+(const RadonCharge& other) const;

    std::optional<double> declared_q() const { return declared_q_; }
    void set_declared_q(double q) { declared_q_ = q; }

private:
    ChargePart pos_, neg_;
    std::optional<double> declared_q_;
};

enum class Part { Positive, Negative, Total };

// |ν|(Ω ∩ B(center, r)) (or one part). Returns +inf when a non-integrable
// distance weight makes the ball mass diverge.
double ball_mass(const RadonCharge& charge, Part part, Point center, double r,
                 const Domain2D& domain);

enum class MorreyMode { Global, Floated };

struct ScanSpec {
    std::vector<Point> centers;
    int levels = 12; // dyadic radii diam * 2^{-j}, j = 0..levels

    static ScanSpec defaults(const Domain2D& domain, const TriMesh* mesh = nullptr);
};

struct MorreyReport {
    double q = kInfinity;
    MorreyMode mode = MorreyMode::Global;
    double value = 0;
    bool divergent = false;
    Point witness_center{};
    double witness_radius = 0;
    long samples = 0;
    int skipped_centers = 0; // centers with empty admissible radius range
};

// Sampled sup of r^{-n/q'} |ν|(Ω ∩ B(x,r)); floated mode restricts to
// r < δ_Γ(x)/2. n = 2 throughout.
MorreyReport morrey_norm(const RadonCharge& charge, double q, MorreyMode mode,
                         const Domain2D& domain, const ScanSpec& scan);

// β = (p - n/q) / (p - 1); q = ∞ drops the n/q term.
double beta_exponent(double p, double q, int n);

// δ_Γ^{-t} ν with the declared Morrey class shifted accordingly.
RadonCharge distance_weight(const RadonCharge& charge, double t, const Domain2D& domain);

// Load vector l_i = ∫ φ_i dν for the P1 nodal basis.
Eigen::VectorXd project_load(const RadonCharge& charge, const TriMesh& mesh);

} // namespace pplab

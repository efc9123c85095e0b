#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pplab/capacity.hpp"

using namespace pplab;

TEST_CASE("annulus capacity, p = 2") {
    const Domain2D U = Domain2D::disk({0, 0}, 2, 256);
    const Compact2D K = Compact2D::disk({0, 0}, 1, 256);
    const double exact = oracle::annulus_capacity(2, 1, 2); // 2π/ln 2
    CHECK(exact == doctest::Approx(9.06472).epsilon(1e-5));

    const CapacityReport rep = capacity(K, U, 2.0, 1.0 / 32);
    CHECK(rep.value >= exact - 1e-9); // conforming upper bound
    CHECK(rep.value <= exact * 1.05);
}

TEST_CASE("annulus capacity, p = 1.5") {
    const Domain2D U = Domain2D::disk({0, 0}, 2, 256);
    const Compact2D K = Compact2D::disk({0, 0}, 1, 256);
    const double exact = oracle::annulus_capacity(1.5, 1, 2); // 2π√2
    CHECK(exact == doctest::Approx(2 * M_PI * std::sqrt(2.0)).epsilon(1e-13));
    const CapacityReport rep = capacity(K, U, 1.5, 1.0 / 32);
    CHECK(rep.value == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("capacity report invariants") {
    const Domain2D U = Domain2D::disk({0, 0}, 2, 128);
    const Compact2D K = Compact2D::disk({0, 0}, 1, 128);
    const CapacityReport rep = capacity(K, U, 2.0, 1.0 / 16);
    REQUIRE(rep.minimizer.has_value());
    const ScalarField& u = *rep.minimizer;
    // value is exactly the p-energy of the returned field
    CHECK(rep.value ==
          doctest::Approx(u.p_energy(EllipticOperator::p_laplacian(2))).epsilon(1e-10));
    // minimizer stays inside [0, 1] and hits its constraints
    CHECK(u.min_value() >= -1e-9);
    CHECK(u.max_value() <= 1 + 1e-9);
    for (int i = 0; i < u.mesh().node_count(); ++i) {
        if (K.contains(u.mesh().nodes()[static_cast<std::size_t>(i)]))
            CHECK(u[i] >= 1.0 - 1e-9);
    }
}

TEST_CASE("empty condenser has zero capacity") {
    const Domain2D U = Domain2D::disk({0, 0}, 2, 128);
    const CapacityReport rep = capacity(Compact2D::empty(), U, 2.0, 1.0 / 8);
    CHECK(rep.value == 0.0);
    CHECK(rep.minimizer->max_abs() == 0.0);
}

TEST_CASE("capacity error paths") {
    const Domain2D U = Domain2D::disk({0, 0}, 1, 128);
    CHECK_THROWS_WITH_AS(capacity(Compact2D::disk({0, 0}, 2, 64), U, 2.0, 1.0 / 8),
                         doctest::Contains("bad-condenser"), Error);
    // a condenser below mesh resolution
    CHECK_THROWS_WITH_AS(
        capacity(Compact2D::disk({0.4, 0.3}, 1e-4, 16), U, 2.0, 1.0 / 4,
                 CondenserConstraint::NodesOnly),
        doctest::Contains("under-resolved"), Error);
}

TEST_CASE("capacity is monotone in the condenser") {
    const Domain2D U = Domain2D::disk({0, 0}, 2, 128);
    const Compact2D small = Compact2D::polygon({{-0.4, -0.4}, {0.4, -0.4}, {0.4, 0.4}, {-0.4, 0.4}});
    const Compact2D big = Compact2D::polygon({{-0.8, -0.8}, {0.8, -0.8}, {0.8, 0.8}, {-0.8, 0.8}});
    const double a = capacity(small, U, 2.0, 1.0 / 16).value;
    const double b = capacity(big, U, 2.0, 1.0 / 16).value;
    CHECK(a <= b + 1e-9);
}

TEST_CASE("capacity is anti-monotone in the surrounding set") {
    const Compact2D K = Compact2D::disk({0, 0}, 0.5, 128);
    const Domain2D small = Domain2D::disk({0, 0}, 1.5, 128);
    const Domain2D big = Domain2D::disk({0, 0}, 2.0, 128);
    const double a = capacity(K, small, 2.0, 1.0 / 16).value;
    const double b = capacity(K, big, 2.0, 1.0 / 16).value;
    CHECK(a >= b - 1e-9);
}

TEST_CASE("p = 2 capacity is scale invariant") {
    const double base =
        capacity(Compact2D::disk({0, 0}, 1, 128), Domain2D::disk({0, 0}, 2, 128), 2.0, 1.0 / 24)
            .value;
    for (double s : {0.5, 2.0}) {
        const double scaled = capacity(Compact2D::disk({0, 0}, s, 128),
                                       Domain2D::disk({0, 0}, 2 * s, 128), 2.0, s / 24)
                                  .value;
        CHECK(scaled == doctest::Approx(base).epsilon(0.01));
    }
}

TEST_CASE("cdc scan on the square") {
    const Domain2D sq = Domain2D::unit_square();
    const CdcReport rep = cdc_check(sq, 2.0, {0.1, 0.2}, 8);
    REQUIRE(!rep.samples.empty());
    for (const CdcSample& s : rep.samples) {
        if (s.under_resolved) continue;
        CHECK(s.ratio > 0.0);
        CHECK(s.ratio <= 1.0 + 0.05);
        CHECK(s.denominator == doctest::Approx(2 * M_PI / std::log(2.0)).epsilon(1e-12));
    }
    // flat edges of a square are thick: the sampled condition is strong
    CHECK(rep.gamma_estimate >= 0.3);

    // corner samples dominate flat-edge samples
    double corner_ratio = 0, edge_ratio = 0;
    for (const CdcSample& s : rep.samples) {
        if (s.R != 0.1 || s.under_resolved) continue;
        const bool corner = (std::abs(s.xi.x) < 1e-12 || std::abs(s.xi.x - 1) < 1e-12) &&
                            (std::abs(s.xi.y) < 1e-12 || std::abs(s.xi.y - 1) < 1e-12);
        if (corner)
            corner_ratio = std::max(corner_ratio, s.ratio);
        else
            edge_ratio = std::max(edge_ratio, s.ratio);
    }
    CHECK(corner_ratio >= edge_ratio - 0.02);
}

TEST_CASE("cdc requires a nonempty gamma and sane radii") {
    const Domain2D sq = Domain2D::unit_square().with_empty_gamma();
    CHECK_THROWS_WITH_AS(cdc_check(sq, 2.0, {0.1}, 4), doctest::Contains("gamma-empty"), Error);
    const Domain2D ok = Domain2D::unit_square();
    CHECK_THROWS_WITH_AS(cdc_check(ok, 2.0, {5.0}, 4), doctest::Contains("bad-condenser"), Error);
}

TEST_CASE("cdc general p uses the scaled reference denominator") {
    const Domain2D sq = Domain2D::unit_square();
    const CdcReport rep = cdc_check(sq, 1.5, {0.125}, 4);
    const double ref = oracle::annulus_capacity(1.5, 1, 2) * std::pow(0.125, 0.5);
    for (const CdcSample& s : rep.samples) {
        CHECK(s.denominator == doctest::Approx(ref).epsilon(0.06));
    }
    CHECK(rep.gamma_estimate > 0.2);
}

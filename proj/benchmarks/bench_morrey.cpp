#include <benchmark/benchmark.h>

#include "pplab/measure.hpp"

using namespace pplab;

static void BallMassExact(benchmark::State& state) {
    const Domain2D sq = Domain2D::unit_square();
    const RadonCharge leb = RadonCharge::lebesgue();
    double r = 0.05;
    for (auto _ : state) {
        r = r > 0.6 ? 0.05 : r + 0.01;
        benchmark::DoNotOptimize(ball_mass(leb, Part::Total, {0.4, 0.6}, r, sq));
    }
}
BENCHMARK(BallMassExact);

static void BallMassWeighted(benchmark::State& state) {
    const Domain2D sq = Domain2D::unit_square();
    const RadonCharge nu = distance_weight(RadonCharge::lebesgue(), 0.5, sq);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ball_mass(nu, Part::Total, {0.5, 0.5}, 0.2, sq));
    }
}
BENCHMARK(BallMassWeighted);

static void MorreyScan(benchmark::State& state) {
    const Domain2D sq = Domain2D::unit_square();
    const TriMesh mesh = build_mesh(sq, 1.0 / state.range(0));
    const ScanSpec scan = ScanSpec::defaults(sq, &mesh);
    const RadonCharge leb = RadonCharge::lebesgue();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            morrey_norm(leb, kInfinity, MorreyMode::Floated, sq, scan).value);
    }
}
BENCHMARK(MorreyScan)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

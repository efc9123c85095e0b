#include <benchmark/benchmark.h>

#include "pplab/mesh.hpp"

using namespace pplab;

static void MeshUnitSquare(benchmark::State& state) {
    const Domain2D sq = Domain2D::unit_square();
    const double h = 1.0 / state.range(0);
    for (auto _ : state) {
        TriMesh mesh = build_mesh(sq, h);
        benchmark::DoNotOptimize(mesh.node_count());
    }
    state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(MeshUnitSquare)->Arg(16)->Arg(32)->Arg(64)->Complexity();

static void MeshDisk256(benchmark::State& state) {
    const Domain2D disk = Domain2D::disk({0, 0}, 1.0, 256);
    const double h = 1.0 / state.range(0);
    for (auto _ : state) {
        TriMesh mesh = build_mesh(disk, h);
        benchmark::DoNotOptimize(mesh.tri_count());
    }
}
BENCHMARK(MeshDisk256)->Arg(16)->Arg(32)->Arg(64);

static void PointLocation(benchmark::State& state) {
    const TriMesh mesh = build_mesh(Domain2D::disk({0, 0}, 1.0, 256), 1.0 / 64);
    double x = -0.7;
    for (auto _ : state) {
        x += 0.013;
        if (x > 0.7) x = -0.7;
        benchmark::DoNotOptimize(mesh.locate({x, 0.21}));
    }
}
BENCHMARK(PointLocation);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "pplab/solver.hpp"

using namespace pplab;

static void LoadProjection(benchmark::State& state) {
    const TriMesh mesh = build_mesh(Domain2D::unit_square(), 1.0 / state.range(0));
    const RadonCharge nu = RadonCharge::lebesgue();
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_load(nu, mesh).sum());
    }
}
BENCHMARK(LoadProjection)->Arg(16)->Arg(32)->Arg(64);

static void LinearSolve(benchmark::State& state) {
    auto mesh =
        std::make_shared<TriMesh>(build_mesh(Domain2D::disk({0, 0}, 1.0, 256), 1.0 / state.range(0)));
    for (auto _ : state) {
        ScalarField u =
            solve_dirichlet(EllipticOperator::p_laplacian(2), RadonCharge::lebesgue(), mesh);
        benchmark::DoNotOptimize(u.max_value());
    }
}
BENCHMARK(LinearSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void NewtonSolveP15(benchmark::State& state) {
    auto mesh =
        std::make_shared<TriMesh>(build_mesh(Domain2D::disk({0, 0}, 1.0, 256), 1.0 / state.range(0)));
    for (auto _ : state) {
        ScalarField u =
            solve_dirichlet(EllipticOperator::p_laplacian(1.5), RadonCharge::lebesgue(), mesh);
        benchmark::DoNotOptimize(u.max_value());
    }
}
BENCHMARK(NewtonSolveP15)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

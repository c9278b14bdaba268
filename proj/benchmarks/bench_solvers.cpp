#include <benchmark/benchmark.h>

#include "ocie/fredholm.hpp"
#include "ocie/lq_volterra.hpp"

namespace {

using namespace ocie;

MatrixKernelField smooth_kernel(GridPtr grid) {
    return MatrixKernelField::sample_two(grid, 1, 1, [](double x, double y) {
        return Eigen::MatrixXd::Constant(1, 1, 0.3 * std::sin(x + y));
    });
}

void BM_SecondKindSolve(benchmark::State& state) {
    auto grid = make_grid(0.0, 1.0, static_cast<int>(state.range(0)),
                          QuadratureRule::Trapezoid);
    const MatrixKernelField K = smooth_kernel(grid);
    const GridFunction g = GridFunction::sample_scalar(grid, [](double x) {
        return std::cos(x);
    });
    for (auto _ : state) benchmark::DoNotOptimize(solve_second_kind(K, g, 1));
}

void BM_Resolvent(benchmark::State& state) {
    auto grid = make_grid(0.0, 1.0, static_cast<int>(state.range(0)),
                          QuadratureRule::Trapezoid);
    const MatrixKernelField K = smooth_kernel(grid);
    for (auto _ : state) benchmark::DoNotOptimize(resolvent(K));
}

void BM_VolterraJoint(benchmark::State& state) {
    auto grid = make_grid(0.0, 1.0, static_cast<int>(state.range(0)),
                          QuadratureRule::Trapezoid);
    VolterraLQProblem p{
        MatrixKernelField::sample_two(grid, 1, 1,
                                      [](double t, double s) {
                                          return Eigen::MatrixXd::Constant(
                                              1, 1, 0.2 * std::exp(-t + s));
                                      }),
        MatrixKernelField::sample_two(grid, 1, 1,
                                      [](double t, double s) {
                                          return Eigen::MatrixXd::Constant(
                                              1, 1, 1.0 + 0.1 * t * s);
                                      }),
        GridFunction::sample_scalar(grid, [](double t) { return 1.0 + t; }),
        MatrixKernelField::sample_one(grid, 1, 1,
                                      [](double) { return Eigen::MatrixXd::Identity(1, 1); }),
        MatrixKernelField::sample_one(grid, 1, 1,
                                      [](double) { return Eigen::MatrixXd::Zero(1, 1); }),
        MatrixKernelField::sample_one(grid, 1, 1,
                                      [](double) { return Eigen::MatrixXd::Identity(1, 1); }),
    };
    const VolterraDerived d = derived_kernels(p);
    for (auto _ : state) benchmark::DoNotOptimize(solve_joint(p, d));
}

} // namespace

BENCHMARK(BM_SecondKindSolve)->Arg(65)->Arg(129)->Arg(257);
BENCHMARK(BM_Resolvent)->Arg(65)->Arg(129);
BENCHMARK(BM_VolterraJoint)->Arg(33)->Arg(65);

BENCHMARK_MAIN();

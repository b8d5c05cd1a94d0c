#include <benchmark/benchmark.h>

#include "padicpar/function_space.hpp"
#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicpar/markov.hpp"

using namespace padic;

namespace {

LocallyConstantFn bump(int p, int n, int ell, int M) {
    LocallyConstantFn f = LocallyConstantFn::indicator_ball(p, n, ell, M, 0);
    f += 0.5 * LocallyConstantFn::indicator_ball(p, n, ell, M, ell + 1);
    return f;
}

void kernel_eval(benchmark::State& st) {
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    int k = -20;
    for (auto _ : st) {
        benchmark::DoNotOptimize(hk.z(Shell{k}, 0.5).value);
        k = k == 20 ? -20 : k + 1;
    }
}
BENCHMARK(kernel_eval);

void kernel_build(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(HeatKernel(HeatKernelParams::power(2, 1, 2.5, 1.0)).symbol(0));
}
BENCHMARK(kernel_build)->Unit(benchmark::kMillisecond);

void w_direct(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0));
    const RadialProfile w = RadialProfile::w_power(2, 1, 2.5);
    const LocallyConstantFn f = bump(2, 1, -d, d);
    for (auto _ : st) benchmark::DoNotOptimize(apply_W_direct(w, f).values().data());
}
BENCHMARK(w_direct)->DenseRange(2, 6, 2);

void w_fourier(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0));
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    const LocallyConstantFn f = bump(2, 1, -d, d);
    for (auto _ : st)
        benchmark::DoNotOptimize(
            apply_W_fourier(hk.params().w, [&](int m) { return hk.symbol(m); }, f).values().data());
}
BENCHMARK(w_fourier)->DenseRange(2, 6, 2);

void heat_convolution(benchmark::State& st) {
    const int d = static_cast<int>(st.range(0));
    const HeatKernel hk(HeatKernelParams::power(2, 1, 2.5, 1.0));
    const LocallyConstantFn f = bump(2, 1, -d, d);
    for (auto _ : st) benchmark::DoNotOptimize(convolve_heat(hk, 0.5, f).values().data());
}
BENCHMARK(heat_convolution)->DenseRange(2, 6, 2);

void levi_build(benchmark::State& st) {
    CoefficientField cf = CoefficientField::constant(2, 1, 2.5, 1.0, -1, 0, 1.0);
    cf.mu = 0.5;
    cf.a0.front()[1] = 1.5;
    LeviConfig cfg;
    cfg.mesh_nodes = static_cast<int>(st.range(0));
    cfg.exterior_shells = 24;
    for (auto _ : st) benchmark::DoNotOptimize(FundamentalSolution(cf, cfg).states());
}
BENCHMARK(levi_build)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void simulate_const(benchmark::State& st) {
    BatchConfig bc;
    bc.count = static_cast<std::size_t>(st.range(0));
    bc.times = {0.0, 0.5, 1.0};
    const HeatKernelParams hp = HeatKernelParams::power(2, 1, 2.5, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(simulate(bc, hp).raw().data());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(simulate_const)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

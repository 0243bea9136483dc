#include <benchmark/benchmark.h>

#include "nicsim/calibrate.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/link.hpp"
#include "nicsim/reference.hpp"
#include "nicsim/sim.hpp"

using namespace nicsim;

namespace {

void BM_Packetize(benchmark::State& state) {
    PcieLinkConfig link;
    std::uint64_t size = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(packetize(ByteSize{size}, link));
        size = size * 2654435761u % (64 * MiB) + 1;
    }
}
BENCHMARK(BM_Packetize);

void BM_AnalyticSweep(benchmark::State& state) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    const auto plan = standard_plan(s);
    for (auto _ : state) benchmark::DoNotOptimize(run_model_sweep(s, plan, ModelKind::Analytic));
}
BENCHMARK(BM_AnalyticSweep)->Unit(benchmark::kMicrosecond);

void BM_DesTransfer(benchmark::State& state) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    const TransferRequest req{Direction::CardToHost, ByteSize{static_cast<std::uint64_t>(state.range(0))},
                              static_cast<int>(state.range(1)), ByteSize{0}};
    for (auto _ : state) benchmark::DoNotOptimize(run_transfer(s, req));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DesTransfer)->Args({64 * 1024, 1})->Args({MiB, 1})->Args({MiB, 4})->Unit(benchmark::kMicrosecond);

void BM_DesSweepThreads(benchmark::State& state) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    const auto plan = standard_plan(s);
    SimOptions opt;
    opt.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(s, plan, opt));
}
BENCHMARK(BM_DesSweepThreads)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FitPetalinux(benchmark::State& state) {
    const auto refs = published_references();
    const auto seed = builtin_scenario("ddr-petalinux");
    const auto spec = default_calibration_spec("ddr-petalinux");
    for (auto _ : state) benchmark::DoNotOptimize(fit_parameters(seed, spec, refs));
}
BENCHMARK(BM_FitPetalinux)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

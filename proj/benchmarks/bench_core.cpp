#include <benchmark/benchmark.h>

#include "rewind/bound.hpp"
#include "rewind/lmg.hpp"
#include "rewind/random.hpp"
#include "rewind/recovery.hpp"
#include "rewind/rotor.hpp"

using namespace rewindlab;

static void BM_HaarUnitary(benchmark::State& state) {
    SeededSource src(1, 0);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(haar_unitary(n, src));
}
BENCHMARK(BM_HaarUnitary)->Arg(4)->Arg(64)->Arg(256);

static void BM_RunProtocol(benchmark::State& state) {
    SeededSource src(2, 0);
    const auto bath = static_cast<std::size_t>(state.range(0));
    const Matrix u = haar_unitary(2 * bath, src);
    const PureState psi = haar_state(2, src);
    const PureState chi = haar_state(bath, src, Role::bath);
    const auto gate = strong_measurement(2);
    for (auto _ : state) benchmark::DoNotOptimize(run_protocol(psi, chi, u, gate).overlap);
}
BENCHMARK(BM_RunProtocol)->Arg(16)->Arg(128);

static void BM_FloquetStep(benchmark::State& state) {
    RotorConfig c;
    c.grid = static_cast<std::size_t>(state.range(0));
    FloquetPropagator prop(c);
    SpinorWave w = product_state(c, Vector::Unit(2, 0));
    for (auto _ : state) {
        prop.step(w, Direction::forward);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_FloquetStep)->Arg(1 << 12)->Arg(1 << 16);

static void BM_LmgChannel(benchmark::State& state) {
    LmgConfig c;
    c.spin = static_cast<int>(state.range(0));
    const LmgModel model(c, strong_measurement(2));
    double t = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.channel(t));
        t += 0.5;
    }
}
BENCHMARK(BM_LmgChannel)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_FTilde(benchmark::State& state) {
    SeededSource gs(3, 0);
    const auto gate = random_gate(static_cast<std::size_t>(state.range(0)), 2, gs);
    const SeededSource src(4, 0);
    for (auto _ : state) benchmark::DoNotOptimize(f_tilde(gate, 5, 1e-12, src).value);
}
BENCHMARK(BM_FTilde)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "mixneu/analysis.hpp"
#include "mixneu/spectral.hpp"

using namespace mixneu;

namespace {

const PiecewiseField kWeight{{0.0, 0.25, 1.0}, {1.0, -1.0}, FieldRole::Weight};

void BM_AssembleMixed(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Mesh1D mesh = build_mesh(0.0, 1.0, n, 1.0, n / 4);
    for (auto _ : state) {
        AssembledForms f = assemble({1.0, 1.0, 0.5, 1}, mesh, kWeight);
        benchmark::DoNotOptimize(f.B.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_AssembleMixed)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

void BM_AssembleClassical(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Mesh1D mesh = build_mesh(0.0, 1.0, n, 1.0, 4);
    for (auto _ : state) {
        AssembledForms f = assemble({1.0, 0.0, 0.5, 1}, mesh, kWeight);
        benchmark::DoNotOptimize(f.B.data());
    }
}
BENCHMARK(BM_AssembleClassical)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SolveSpectrum(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const AssembledForms f = assemble({1.0, 1.0, 0.5, 1}, build_mesh(0.0, 1.0, n, 1.0, n / 4), kWeight);
    for (auto _ : state) {
        Spectrum s = solve_spectrum(f, 3, 3);
        benchmark::DoNotOptimize(s.positives.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_SolveSpectrum)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

void BM_DeGiorgiSearch(benchmark::State& state) {
    const AssembledForms f = assemble({1.0, 1.0, 0.5, 1}, build_mesh(0.0, 1.0, 128, 1.0, 32), kWeight);
    const Spectrum s = solve_spectrum(f, 1, 1);
    const PiecewiseField zero = PiecewiseField::constant(0.0, 1.0, 0.0, FieldRole::Source);
    for (auto _ : state) {
        DeGiorgiReport r = degiorgi_search(f, s.positives.front().u, zero, 4.0);
        benchmark::DoNotOptimize(r.bound);
    }
}
BENCHMARK(BM_DeGiorgiSearch)->Unit(benchmark::kMicrosecond);

void BM_AuditMediant(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(audit_mediant(100000, 42).violations);
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_AuditMediant)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

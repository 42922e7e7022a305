#include <benchmark/benchmark.h>

#include "coopscatter/cloud.hpp"
#include "coopscatter/discrete.hpp"
#include "coopscatter/meanfield.hpp"

namespace {

using namespace coop;
namespace dd = coop::discrete;

AtomEnsemble cloud_of(int n) {
    return cloud::sample(CloudProfile(ProfileKind::uniform, 20.0, n), 42);
}

void BM_Sample(benchmark::State& state) {
    const CloudProfile profile(ProfileKind::gaussian, 20.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cloud::sample(profile, 42));
}
BENCHMARK(BM_Sample)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
    const auto ens = cloud_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dd::assemble(ens, DriveParams{10.0, 1.0}));
}
BENCHMARK(BM_Assemble)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SteadyState(benchmark::State& state) {
    const auto sys = dd::assemble(cloud_of(static_cast<int>(state.range(0))), DriveParams{10.0, 1.0});
    for (auto _ : state) benchmark::DoNotOptimize(dd::steady_state(sys));
}
BENCHMARK(BM_SteadyState)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Spectral(benchmark::State& state) {
    const auto sys = dd::assemble(cloud_of(static_cast<int>(state.range(0))), DriveParams{10.0, 1.0});
    for (auto _ : state) benchmark::DoNotOptimize(dd::spectral(sys));
}
BENCHMARK(BM_Spectral)->Arg(100)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

// 601-point free decay from the steady state, decomposition reused
void BM_EvolveSpectral(benchmark::State& state) {
    const auto sys = dd::assemble(cloud_of(static_cast<int>(state.range(0))), DriveParams{10.0, 1.0});
    const auto decomposition = dd::spectral(sys);
    const auto start = dd::steady_state(sys);
    std::vector<double> times;
    for (int k = 0; k <= 600; ++k) times.push_back(0.01 * k);
    for (auto _ : state) benchmark::DoNotOptimize(dd::evolve(sys, decomposition, start, times, Phase::free));
}
BENCHMARK(BM_EvolveSpectral)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EvolveIntegrate(benchmark::State& state) {
    const auto sys = dd::assemble(cloud_of(static_cast<int>(state.range(0))), DriveParams{10.0, 1.0});
    const auto start = dd::steady_state(sys);
    std::vector<double> times;
    for (int k = 0; k <= 100; ++k) times.push_back(0.01 * k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dd::evolve(sys, start, times, Phase::free, EvolutionMethod::integrate));
    }
}
BENCHMARK(BM_EvolveIntegrate)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_PowerSeries(benchmark::State& state) {
    const auto ens = cloud_of(static_cast<int>(state.range(0)));
    const auto sys = dd::assemble(ens, DriveParams{10.0, 1.0});
    std::vector<double> times;
    for (int k = 0; k <= 600; ++k) times.push_back(0.01 * k);
    const auto traj = dd::evolve(sys, dd::steady_state(sys), times, Phase::free);
    for (auto _ : state) benchmark::DoNotOptimize(dd::total_power_series(traj, ens));
}
BENCHMARK(BM_PowerSeries)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ModeSpectrum(benchmark::State& state) {
    const auto kind = static_cast<ProfileKind>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(meanfield::mode_spectrum(CloudProfile(kind, 20.0, 1000)));
}
BENCHMARK(BM_ModeSpectrum)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_MeanFieldSeries(benchmark::State& state) {
    const ModeEvolution evo(meanfield::mode_spectrum(CloudProfile(ProfileKind::gaussian, 20.0, 1000)),
                            DriveParams{10.0, 1.0});
    for (auto _ : state) {
        double acc = 0.0;
        for (int k = 0; k <= 600; ++k) acc += meanfield::total_power(evo, 0.01 * k, Phase::free);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_MeanFieldSeries)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

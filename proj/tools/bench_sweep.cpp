// Serial reference vs OpenMP sweep over a microscope-chart mu_bar grid.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "canard/mmo.hpp"
#include "canard/sweep.hpp"

namespace {

namespace cn = canard::canonical;
using namespace canard;

std::vector<double> grid() {
    std::vector<double> g;
    for (int i = 0; i < 16; ++i) g.push_back(0.10 + 0.004 * i);
    return g;
}

std::string signature_at(double mu_bar) {
    mmo::SimOptions sim;
    sim.t_max = 1500.0;
    const cn::MicroParams p{mu_bar, cn::reference::a, cn::reference::b, cn::reference::eps, cn::kD1};
    return mmo::micro_signature(p, cn::kDefaultRho, sim).pattern();
}

void BM_serial(benchmark::State& state) {
    const auto g = grid();
    for (auto _ : state) {
        std::vector<std::string> out(g.size());
        sweep::serial_for(g.size(), [&](std::size_t i) { out[i] = signature_at(g[i]); });
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(g.size()));
}

void BM_parallel(benchmark::State& state) {
    const auto g = grid();
    const int workers = static_cast<int>(state.range(0));
    std::vector<std::string> ref(g.size());
    sweep::serial_for(g.size(), [&](std::size_t i) { ref[i] = signature_at(g[i]); });
    for (auto _ : state) {
        std::vector<std::string> out(g.size());
        sweep::parallel_for(g.size(), workers, [&](std::size_t i) { out[i] = signature_at(g[i]); });
        benchmark::DoNotOptimize(out.data());
        if (out != ref) {
            state.SkipWithError("parallel sweep differs from the serial reference");
            break;
        }
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(g.size()));
}

}  // namespace

BENCHMARK(BM_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

// Parallel kernels against their serial references.  Speedups need more than
// one core; pin the thread count with OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "qpw/actions.hpp"
#include "qpw/finite_gap.hpp"
#include "qpw/hill.hpp"
#include "qpw/oracle.hpp"
#include "qpw/phase_diagram.hpp"

using namespace qpw;

namespace {

std::shared_ptr<const FiniteGapDispersion> two_gap()
{
    static auto d = [] {
        FiniteGapSpec s;
        s.edges = {0.0, 3.8571429, 6.8571429, 12.100395, 100.70923};
        s.dirichlet_phases = {0.3, 1.1};
        return std::make_shared<const FiniteGapDispersion>(s);
    }();
    return d;
}

const PeriodicPotential& asym()
{
    static const auto v = PeriodicPotential::fourier({0.0, 2.0, 0.0}, {0.0, 0.0, 0.8});
    return v;
}

template <bool Par>
void lambda(benchmark::State& st)
{
    const BandStructure b = band_edges(asym(), 3);
    for (auto _ : st) benchmark::DoNotOptimize(Par ? lambda_n(asym(), b, 1) : lambda_n_serial(asym(), b, 1));
}

template <bool Par>
void profile(benchmark::State& st)
{
    std::vector<double> E;
    for (int i = 0; i < 8; ++i) E.push_back(4.9 + 0.9 * i / 7);
    for (auto _ : st)
        benchmark::DoNotOptimize(Par ? action_profile(two_gap(), 1, 2.0, E) : action_profile_serial(two_gap(), 1, 2.0, E));
}

template <bool Par>
void scan(benchmark::State& st)
{
    const OracleSystem s(PeriodicPotential::fourier({0.0, 2.0}), 2.5, 0.05);
    std::vector<double> grid;
    for (int i = 0; i < 32; ++i) grid.push_back(8.0 + 0.1 * i);
    for (auto _ : st)
        benchmark::DoNotOptimize(Par ? spectrum_scan(s, grid, 200) : spectrum_scan_serial(s, grid, 200));
}

template <bool Par>
void diagram(benchmark::State& st)
{
    const PhaseDiagramSpec spec = delta_bounding_box(two_gap()->bands(), 1, 40, 40);
    for (auto _ : st)
        benchmark::DoNotOptimize(Par ? phase_diagram(two_gap(), spec) : phase_diagram_serial(two_gap(), spec));
}

}  // namespace

BENCHMARK(lambda<false>)->Name("lambda_n/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(lambda<true>)->Name("lambda_n/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(profile<false>)->Name("action_profile/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(profile<true>)->Name("action_profile/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(scan<false>)->Name("spectrum_scan/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(scan<true>)->Name("spectrum_scan/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(diagram<false>)->Name("phase_diagram/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(diagram<true>)->Name("phase_diagram/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "portnet/dbscan.hpp"
#include "portnet/kernels.hpp"
#include "portnet/ports.hpp"
#include "portnet/segmentation.hpp"
#include "portnet/synth.hpp"
#include "portnet/temporal_graph.hpp"

namespace {

using namespace portnet;

struct Fixture {
    Scenario scenario;
    std::vector<LonLat> stationary;
    std::vector<LonLat> all_points;
    std::vector<Ring> polygons;
    std::vector<LabeledMessage> labeled;
    std::vector<Visit> visits;
    std::vector<Voyage> voyages;

    Fixture() {
        ScenarioConfig c;
        c.days = 30;
        scenario = simulate(c);
        stationary = select_stationary_points(scenario.messages, 0.5);
        for (const auto& m : scenario.messages) all_points.push_back(m.position());
        for (const auto& p : scenario.ports) polygons.push_back(p.polygon);
        labeled = annotate(scenario.messages, scenario.ports, Exec::Serial);
        visits = extract_visits(labeled);
        voyages = extract_voyages(visits, labeled);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_CoreFlags(benchmark::State& state, Exec exec) {
    const auto& f = fixture();
    const DbscanParams params;
    const PointGrid grid(f.stationary, params.eps / 1.5);
    for (auto _ : state) benchmark::DoNotOptimize(core_flags(f.stationary, grid, params.eps, params.min_pts, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.stationary.size()));
}

void BM_LocatePoints(benchmark::State& state, Exec exec) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(locate_points(f.all_points, f.polygons, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.all_points.size()));
}

void BM_BuildSnapshots(benchmark::State& state, Exec exec) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(build_snapshots(f.voyages, f.visits, f.labeled, f.scenario.ports, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_CoreFlags, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_CoreFlags, openmp, Exec::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LocatePoints, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LocatePoints, openmp, Exec::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BuildSnapshots, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_BuildSnapshots, openmp, Exec::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

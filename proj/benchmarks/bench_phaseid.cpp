#include <benchmark/benchmark.h>
#include <fixtures.hpp>

#include <phaseid/ingest.hpp>
#include <phaseid/search.hpp>
#include <phaseid/synthfeeder.hpp>

#include <sstream>

using namespace phaseid;

namespace {

const std::filesystem::path kScenarios = PHASEID_SCENARIO_DIR;

void BM_IdentifyFieldHour(benchmark::State& state) {
    const auto pair = test::random_pair(1, static_cast<std::size_t>(state.range(0)), 3, 120.0);
    ScoringConfig cfg;
    cfg.alpha = 10000.0;
    cfg.angle_mode = state.range(1) != 0 ? AngleMode::ShiftRemoved : AngleMode::Raw;
    for (auto _ : state) benchmark::DoNotOptimize(identify(pair.ref, pair.tgt, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IdentifyFieldHour)->Args({432'000, 0})->Args({432'000, 1})->Unit(benchmark::kMillisecond);

void BM_WindowSweep(benchmark::State& state) {
    const auto sim = generate_timeseries(load_scenario(kScenarios / "ieee13like.json"));
    const auto& ref = find_bus(sim.records, "632");
    const auto& tgt = find_bus(sim.records, "671");
    const auto lengths = linear_schedule(ref.sample_count());
    for (auto _ : state) benchmark::DoNotOptimize(window_sweep(ref, tgt, ScoringConfig{}, lengths));
}
BENCHMARK(BM_WindowSweep)->Unit(benchmark::kMicrosecond);

void BM_StreamingUpdate(benchmark::State& state) {
    const auto pair = test::random_pair(2, 4096);
    const PhaseAssignment a{0, 1, 2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fold_statistics(pair.ref, pair.tgt, a, 0, 4096, state.range(0) != 0).finalize());
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_StreamingUpdate)->Arg(0)->Arg(1);

void BM_SolveSnapshot(benchmark::State& state) {
    const auto sc = load_scenario(kScenarios / "ieee13like.json");
    const FeederSolver solver(sc);
    const auto loads = solver.base_loads_kva();
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(loads));
}
BENCHMARK(BM_SolveSnapshot)->Unit(benchmark::kMicrosecond);

void BM_GenerateTimeseries(benchmark::State& state) {
    const auto sc = load_scenario(kScenarios / "ieee13like.json");
    for (auto _ : state) benchmark::DoNotOptimize(generate_timeseries(sc));
}
BENCHMARK(BM_GenerateTimeseries)->Unit(benchmark::kMillisecond);

void BM_ParseCsv(benchmark::State& state) {
    const auto sim = generate_timeseries(load_scenario(kScenarios / "ieee13like.json"));
    std::ostringstream out;
    write_phasor_csv(out, sim.records);
    const std::string text = out.str();
    for (auto _ : state) {
        std::istringstream in(text);
        benchmark::DoNotOptimize(parse_phasor_csv(in));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseCsv)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

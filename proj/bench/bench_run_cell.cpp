#include <benchmark/benchmark.h>

#include "tsdr/harness.hpp"

using namespace tsdr;

namespace {

// Model 5, t75, (100,10,25%): the slowest grid cell type.
struct Fixture {
  CellSpec cell;
  double t;

  Fixture() : cell(table1_model5_cells(64, 11)[10]), t(response_quantile(cell.model, cell.percent, 200'000)) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_RunCellSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(run_cell_serial(f.cell, f.t).two_stage.mean);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cell.reps));
}

void BM_RunCellOpenMP(benchmark::State& state) {
  const Fixture& f = fixture();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_cell(f.cell, f.t, jobs).two_stage.mean);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cell.reps));
}

}  // namespace

BENCHMARK(BM_RunCellSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunCellOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cstdint>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/circuit.hpp"
#include "mtjrng/magnet.hpp"
#include "mtjrng/rng.hpp"
#include "mtjrng/trng.hpp"

using namespace mtjrng;

namespace {

const ModelConfig& model() {
  static const ModelConfig m = default_model(MTJRNG_BENCH_DATA_DIR);
  return m;
}

void BM_PhiloxNormal(benchmark::State& state) {
  CounterRng rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_PhiloxNormal);

void BM_HeunStep(benchmark::State& state) {
  const double temperature = static_cast<double>(state.range(0));
  LlgStepper stepper(MagnetParams{}, temperature, {}, SdeConfig{});
  CounterRng rng(1, 0);
  Magnetization m = Magnetization::tilted_from(false, 0.1);
  for (auto _ : state) {
    m = stepper.step(m, 15e-6, rng);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_HeunStep)->Arg(0)->Arg(300);

void BM_DcOperatingPoint(benchmark::State& state) {
  const Circuit c(model().write_netlist, model().magnet);
  const auto m = Magnetization::antiparallel();
  for (auto _ : state) benchmark::DoNotOptimize(c.dc_operating_point(m, 5e-9));
}
BENCHMARK(BM_DcOperatingPoint);

void BM_WriteTransient(benchmark::State& state) {
  const Circuit c(model().write_netlist, model().magnet);
  TransientOptions opts;
  std::uint64_t trial = 0;
  for (auto _ : state) {
    opts.trial = trial++;
    benchmark::DoNotOptimize(c.transient(Magnetization::antiparallel(), opts));
  }
}
BENCHMARK(BM_WriteTransient)->Unit(benchmark::kMillisecond);

void BM_FastPeriod(benchmark::State& state) {
  PeriodTiming timing;
  timing.write_current = 17.5e-6;
  const TrngEngine engine(model(), timing, Mode::kFast);
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(engine.run_period(1, trial++));
}
BENCHMARK(BM_FastPeriod);

void BM_CircuitPeriod(benchmark::State& state) {
  PeriodTiming timing;
  timing.write_current = 17.5e-6;
  const TrngEngine engine(model(), timing, Mode::kCircuit);
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(engine.run_period(1, trial++));
}
BENCHMARK(BM_CircuitPeriod)->Unit(benchmark::kMillisecond);

void BM_FastCalibration(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(model(), PeriodTiming{}, Mode::kFast, seed++));
  }
}
BENCHMARK(BM_FastCalibration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

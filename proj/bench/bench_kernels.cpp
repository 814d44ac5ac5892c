// Serial reference vs OpenMP kernels on a batch of synthetic hot days.
//   ./hvacd_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include <algorithm>
#include <thread>

#include "hvacd/kernels.hpp"
#include "hvacd/preprocessing.hpp"
#include "hvacd/synth.hpp"

namespace {

using namespace hvacd;

struct Batch {
  std::vector<IcaDayTask> ica;
  std::vector<FineTuneProblem> finetune;
  FineTuneConfig cfg;
};

// One household with `hot` hot days and 12 mild days.
const Batch& batch() {
  static const Batch b = [] {
    constexpr int hot = 16, mild = 12;
    Batch out;
    const Date start = parse_date("2023-07-01");
    const HouseholdSpec spec = random_household_spec(5);
    TemperatureMatrix h = generate_temperature(hot, WeatherProfile::Hot, 6, start);
    TemperatureMatrix m = generate_temperature(mild, WeatherProfile::Mild, 7, start + std::chrono::days{hot});
    TemperatureMatrix all;
    all.temps.resize(24, hot + mild);
    all.temps << h.temps, m.temps;
    all.day_dates = h.day_dates;
    all.day_dates.insert(all.day_dates.end(), m.day_dates.begin(), m.day_dates.end());
    const SyntheticHousehold house = generate_household(spec, all);
    const DailyLoadMatrix mild_days = house.total.select(m.day_dates);
    const BivariateGaussian stats = estimate_base_stats(mild_days.samples, out.cfg.diurnal, out.cfg.nocturnal);
    for (int d = 0; d < hot; ++d) {
      const Vector day = house.total.samples.col(d);
      ResidualEnsemble e = build_residual_ensemble(std::span<const double>(day.data(), day.size()),
                                                   all.day_dates[d], mild_days, 10);
      IcaDayTask t;
      t.residuals = e.residuals;
      t.temps = all.temps.col(d);
      t.options.seed = 100 + d;
      out.ica.push_back(t);

      FineTuneProblem p;
      p.total = day;
      p.ica_hvac = 0.8 * house.hvac.samples.col(d);
      p.mild = mild_days.select(e.mild_dates).samples;
      p.temps = all.temps.col(d);
      p.mild_stats = stats;
      out.finetune.push_back(std::move(p));
    }
    return out;
  }();
  return b;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void BM_IcaSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(serial::extract_hvac_batch(batch().ica));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch().ica.size()));
}

void BM_IcaParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parallel::extract_hvac_batch(batch().ica, workers()));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch().ica.size()));
  state.counters["workers"] = workers();
}

void BM_FineTuneSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(serial::fine_tune_batch(batch().finetune, batch().cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch().finetune.size()));
}

void BM_FineTuneParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel::fine_tune_batch(batch().finetune, batch().cfg, workers()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch().finetune.size()));
  state.counters["workers"] = workers();
}

}  // namespace

BENCHMARK(BM_IcaSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IcaParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FineTuneSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FineTuneParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

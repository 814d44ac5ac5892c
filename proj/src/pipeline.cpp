#include "hvacd/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "hvacd/errors.hpp"
#include "hvacd/evaluation.hpp"
#include "hvacd/kernels.hpp"
#include "hvacd/random.hpp"
#include "json.hpp"

namespace hvacd {

namespace {

template <class Fn>
auto with_customer(const std::string& id, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(id + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(id + ": " + e.what());
  }
}

TimeSeries read_series(const std::string& path, const char* what, const std::string& id,
                       TimeSeries (*loader)(std::istream&, DuplicatePolicy), DuplicatePolicy dup) {
  std::ifstream in(path);
  if (!in) throw DataError(id + ": cannot read " + what + " file " + path);
  return with_customer(id, [&] { return loader(in, dup); });
}

std::span<const double> col_span(const Matrix& m, Eigen::Index c) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

// Per-customer work up to (but excluding) fine-tuning.
struct Prepared {
  CustomerResult result;
  DailyLoadMatrix mild;
  TemperatureMatrix hot_temps;
  std::vector<Eigen::Vector2d> mild_energies;
};

Prepared prepare_customer(const CustomerInput& in, std::size_t customer_index, const PipelineConfig& cfg,
                          bool parallel_kernels) {
  Prepared prep;
  CustomerResult& out = prep.result;
  out.id = in.id;
  out.labels = classify_days(in.loads, in.temps, cfg.classify);
  const std::vector<Date> hot_dates = dates_with(out.labels, DayKind::Hot);
  const std::vector<Date> mild_dates = dates_with(out.labels, DayKind::Mild);
  if (hot_dates.empty()) throw DataError("no hot days");
  if (mild_dates.empty()) throw DataError("no mild days");

  LiulMatrixResult liul = filter_liul_days(in.loads, cfg.liul);
  out.liul_events = std::move(liul.events);
  prep.mild = liul.filtered.select(mild_dates);
  const DailyLoadMatrix hot = liul.filtered.select(hot_dates);
  const DailyLoadMatrix raw_hot = in.loads.select(hot_dates);
  prep.hot_temps = in.temps.select(hot_dates);

  out.mild_stats = estimate_base_stats(prep.mild.samples, cfg.finetune.diurnal, cfg.finetune.nocturnal);
  for (int d = 0; d < prep.mild.days(); ++d) {
    prep.mild_energies.push_back(
        diurnal_nocturnal_energy(col_span(prep.mild.samples, d), cfg.finetune.diurnal, cfg.finetune.nocturnal));
  }
  // The benchmark subtracts the plain mild-day average from the unfiltered
  // total; LIUL removal belongs to the proposed workflow only.
  const Matrix average = benchmark_average_mild(raw_hot, in.loads.select(mild_dates));

  const std::uint64_t customer_seed = derive_seed(cfg.seed ^ cfg.ica.seed, customer_index);
  std::vector<IcaDayTask> tasks(hot_dates.size());
  out.days.resize(hot_dates.size());
  for (std::size_t d = 0; d < hot_dates.size(); ++d) {
    const auto di = static_cast<Eigen::Index>(d);
    ResidualEnsemble ens = build_residual_ensemble(col_span(hot.samples, di), hot_dates[d], prep.mild, cfg.k_use);
    tasks[d].residuals = std::move(ens.residuals);
    tasks[d].temps = prep.hot_temps.temps.col(di);
    tasks[d].options = cfg.ica;
    tasks[d].options.seed = derive_seed(customer_seed, d);

    HotDayResult& day = out.days[d];
    day.date = hot_dates[d];
    day.raw_total = raw_hot.samples.col(di);
    day.total = hot.samples.col(di);
    day.average_hvac = average.col(di);
    day.mild_dates = std::move(ens.mild_dates);
  }
  std::vector<IcaDayOutput> ica = parallel_kernels ? parallel::extract_hvac_batch(tasks, cfg.workers)
                                                   : serial::extract_hvac_batch(tasks);

  Matrix hourly_ica(kHoursPerDay, static_cast<Eigen::Index>(hot_dates.size()));
  for (std::size_t d = 0; d < hot_dates.size(); ++d) {
    HotDayResult& day = out.days[d];
    day.ica = std::move(ica[d].estimate);
    day.ica_hvac = day.ica.hvac;
    day.ica_iterations = ica[d].model.iterations;
    day.ica_converged = ica[d].model.converged;
    if (cfg.dump_sources) day.model = std::move(ica[d].model);
    hourly_ica.col(static_cast<Eigen::Index>(d)) =
        hourly_energy(std::span<const double>(day.ica_hvac.data(), day.ica_hvac.size()));
  }
  out.gamma_init = fit_hourly_bound(hourly_ica, prep.hot_temps.temps);
  return prep;
}

std::vector<Eigen::Vector2d> base_energies(const std::vector<HotDayResult>& days, const FineTuneConfig& cfg) {
  std::vector<Eigen::Vector2d> e;
  for (const HotDayResult& d : days) {
    const Vector& b = d.result.base_hat;
    e.push_back(diurnal_nocturnal_energy(std::span<const double>(b.data(), b.size()), cfg.diurnal, cfg.nocturnal));
  }
  return e;
}

}  // namespace

CustomerInput load_customer(const CustomerPaths& paths, const IngestionOptions& opts) {
  CustomerInput in;
  in.id = paths.id;
  const TimeSeries power = read_series(paths.power, "power", paths.id, &load_power_csv, opts.duplicates);
  const TimeSeries temp =
      read_series(paths.temperature, "temperature", paths.id, &load_temperature_csv, opts.duplicates);
  with_customer(paths.id, [&] {
    DayMatrixBuild built = build_day_matrix(power, opts.max_missing_fraction);
    in.loads = std::move(built.matrix);
    in.dropped = std::move(built.dropped);
    in.temps = build_temperature_matrix(temp, in.loads.day_dates);
    return 0;
  });
  return in;
}

DailyLoadMatrix load_truth(const CustomerPaths& paths, const IngestionOptions& opts) {
  if (paths.truth.empty()) throw DataError(paths.id + ": missing truth file");
  const TimeSeries truth = read_series(paths.truth, "truth", paths.id, &load_truth_csv, opts.duplicates);
  return with_customer(paths.id, [&] { return build_day_matrix(truth, opts.max_missing_fraction).matrix; });
}

PipelineResult run_pipeline(const std::vector<CustomerInput>& inputs, const PipelineConfig& cfg,
                            bool parallel_kernels) {
  if (inputs.empty()) throw DataError("no customers to process");
  PipelineResult res;
  std::vector<Prepared> prepared;
  prepared.reserve(inputs.size());
  for (std::size_t c = 0; c < inputs.size(); ++c) {
    prepared.push_back(
        with_customer(inputs[c].id, [&] { return prepare_customer(inputs[c], c, cfg, parallel_kernels); }));
  }

  std::vector<Eigen::Vector2d> pooled;
  for (const Prepared& p : prepared) pooled.insert(pooled.end(), p.mild_energies.begin(), p.mild_energies.end());
  res.pooled_mild_stats = estimate_energy_stats(pooled);

  // Flattened (customer, day) work list; statistics are frozen per pass.
  struct Item {
    std::size_t customer;
    std::size_t day;
  };
  std::vector<Item> items;
  for (std::size_t c = 0; c < prepared.size(); ++c) {
    for (std::size_t d = 0; d < prepared[c].result.days.size(); ++d) items.push_back({c, d});
  }

  const FineTuneConfig& ft = cfg.finetune;
  const int passes = ft.pdf_mode == PdfMode::Off ? 1 : std::max(1, ft.outer_passes);
  for (int pass = 0; pass < passes; ++pass) {
    // Snapshot of the previous pass's fine-tuned base energies.
    std::vector<std::vector<Eigen::Vector2d>> snapshot(prepared.size());
    if (pass > 0) {
      for (std::size_t c = 0; c < prepared.size(); ++c) snapshot[c] = base_energies(prepared[c].result.days, ft);
    }
    auto pool_for = [&](const Item& item) {
      std::vector<Eigen::Vector2d> pool;
      if (pass == 0) return pool;
      const bool multi = ft.pdf_mode == PdfMode::MultiUser;
      for (std::size_t c = 0; c < prepared.size(); ++c) {
        if (!multi && c != item.customer) continue;
        for (std::size_t d = 0; d < snapshot[c].size(); ++d) {
          if (c == item.customer && d == item.day) continue;
          pool.push_back(snapshot[c][d]);
        }
      }
      return pool;
    };

    std::vector<FineTuneProblem> problems(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Prepared& p = prepared[items[i].customer];
      const HotDayResult& day = p.result.days[items[i].day];
      FineTuneProblem& prob = problems[i];
      prob.total = day.total;
      prob.ica_hvac = day.ica_hvac;
      prob.mild = p.mild.select(day.mild_dates).samples;
      prob.temps = p.hot_temps.temps.col(static_cast<Eigen::Index>(items[i].day));
      const bool multi = ft.pdf_mode == PdfMode::MultiUser;
      prob.mild_stats = multi ? res.pooled_mild_stats : p.result.mild_stats;
      prob.candidate_pool = pool_for(items[i]);
      prob.gamma_init = p.result.gamma_init;
      if (pass > 0) prob.warm_start = day.result.vars;
    }
    std::vector<DisaggregationResult> out = parallel_kernels ? parallel::fine_tune_batch(problems, ft, cfg.workers)
                                                             : serial::fine_tune_batch(problems, ft);
    for (std::size_t i = 0; i < items.size(); ++i) {
      prepared[items[i].customer].result.days[items[i].day].result = std::move(out[i]);
    }
  }

  for (Prepared& p : prepared) {
    for (const HotDayResult& d : p.result.days) res.infeasible_days += d.result.feasible ? 0 : 1;
    res.customers.push_back(std::move(p.result));
  }
  return res;
}

std::vector<CustomerPaths> resolve_customers(const PipelineConfig& cfg) {
  if (!cfg.customers.empty()) return cfg.customers;
  const std::filesystem::path dir = cfg.corpus_path();
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("no customers configured and no corpus manifest at " + (dir / "manifest.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corpus manifest is not valid JSON: ") + e.what());
  }
  std::vector<CustomerPaths> out;
  if (!j.contains("customers") || !j["customers"].is_array()) throw DataError("corpus manifest lists no customers");
  for (const auto& c : j["customers"]) {
    CustomerPaths p;
    p.id = c.at("id").get<std::string>();
    p.power = (dir / c.at("power").get<std::string>()).string();
    p.temperature = (dir / c.at("temperature").get<std::string>()).string();
    if (c.contains("truth")) p.truth = (dir / c.at("truth").get<std::string>()).string();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace hvacd

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hvacd/config.hpp"
#include "hvacd/finetune.hpp"
#include "hvacd/ica.hpp"
#include "hvacd/ingestion.hpp"
#include "hvacd/preprocessing.hpp"

namespace hvacd {

struct CustomerInput {
  std::string id;
  DailyLoadMatrix loads;    // raw 15-minute kW, complete days only
  TemperatureMatrix temps;  // aligned with loads.day_dates
  std::vector<Date> dropped;
};

/// Reads a customer's power and temperature CSVs. Errors name the customer.
CustomerInput load_customer(const CustomerPaths& paths, const IngestionOptions& opts);

/// Reads a customer's sub-metered HVAC CSV as a day matrix. Throws DataError
/// naming the customer when the file is missing or unreadable.
DailyLoadMatrix load_truth(const CustomerPaths& paths, const IngestionOptions& opts);

struct HotDayResult {
  Date date{};
  Vector raw_total;     // N kW before LIUL filtering
  Vector total;         // N kW after LIUL filtering
  Vector average_hvac;  // average-of-mild benchmark
  Vector ica_hvac;
  HvacIcaEstimate ica;
  int ica_iterations = 0;
  bool ica_converged = false;
  std::vector<Date> mild_dates;
  std::optional<IcaModel> model;  // kept when sources are dumped
  DisaggregationResult result;
};

struct CustomerResult {
  std::string id;
  std::vector<DayLabel> labels;
  std::vector<LiulEvent> liul_events;
  BivariateGaussian mild_stats;  // this customer's mild days
  Eigen::Vector2d gamma_init = Eigen::Vector2d::Zero();
  std::vector<HotDayResult> days;
};

struct PipelineResult {
  std::vector<CustomerResult> customers;
  BivariateGaussian pooled_mild_stats;
  int infeasible_days = 0;
};

/// classify -> LIUL -> residual ensembles -> ICA -> fine-tuning for every
/// customer. `parallel_kernels` selects the OpenMP kernels; results are
/// identical either way.
PipelineResult run_pipeline(const std::vector<CustomerInput>& inputs, const PipelineConfig& cfg,
                            bool parallel_kernels = true);

/// Customer list from the config, or from the corpus manifest when the
/// config names none.
std::vector<CustomerPaths> resolve_customers(const PipelineConfig& cfg);

}  // namespace hvacd

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacd/config.hpp"
#include "hvacd/evaluation.hpp"
#include "hvacd/pipeline.hpp"

namespace hvacd {

/// Writes <id>_labels.csv, <id>_days.csv, <id>_liul.csv and summary.csv
/// (plus sources/traces when enabled) into `dir`.
void write_disaggregation(const std::filesystem::path& dir, const PipelineResult& result, const PipelineConfig& cfg);

/// One hot day as read back from <id>_days.csv.
struct DayRecord {
  Date date{};
  Vector raw_total, total, average_hvac, ica_hvac, hvac_hat, base_hat;
};

struct CustomerRecords {
  std::string id;
  std::vector<DayRecord> days;
};

CustomerRecords read_customer_days(const std::filesystem::path& dir, const std::string& id);
void write_customer_days(std::ostream& out, const CustomerRecords& rec);

enum MethodIndex { kAverage = 0, kIca = 1, kFineTuned = 2 };

struct DayScore {
  std::string customer;
  Date date{};
  std::array<double, 3> nmae{};  // percent, by MethodIndex
};

struct EvaluationResult {
  std::array<EvalReport, 3> methods;
  std::vector<DayScore> per_day;
  /// Base-load (diurnal, nocturnal) energy distributions over all hot days:
  /// actual (raw total minus true HVAC), ICA and fine-tuned.
  std::array<BivariateGaussian, 3> base_distributions;
  std::array<Histogram, 3> histograms;  // per-customer nMAE as a fraction
};

/// Scores the three methods. `truth[i]` holds customer i's sub-metered HVAC
/// and must cover every hot day; errors name the customer.
EvaluationResult evaluate_records(const std::vector<CustomerRecords>& records,
                                  const std::vector<DailyLoadMatrix>& truth, const PipelineConfig& cfg);

/// table1.csv, table2.csv, fig6_hourly.csv, fig8_hist.csv, per_customer.csv,
/// per_day.csv and, when enabled, fig6_hourly.svg and fig8_hist.svg.
void write_evaluation(const std::filesystem::path& dir, const EvaluationResult& eval, const PipelineConfig& cfg);

/// Markdown summary of an evaluation.
std::string render_summary(const EvaluationResult& eval);

std::string hourly_boxplot_svg(const EvalReport& report);
std::string histogram_svg(const std::array<EvalReport, 3>& methods, const std::array<Histogram, 3>& hists);

std::string method_name(MethodIndex m, PdfMode mode);

}  // namespace hvacd

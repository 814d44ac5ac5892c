#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hvacd/finetune.hpp"
#include "hvacd/ingestion.hpp"

namespace hvacd {

// Normalized mean absolute error, implemented exactly as
//   nMAE = (1/M) * sum_j sum_i |est_ij - truth_ij| / rating
// i.e. the per-day sum is divided by the number of days only, not by the
// number of samples. Absolute levels depend on this convention; comparisons
// between methods on the same data do not. Returned in percent.
double nmae(const Matrix& est, const Matrix& truth, double rating_kw);

/// |sum est - sum truth| / sum truth, percent.
double nee(const Matrix& est, const Matrix& truth);

struct QuartileRow {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Linear-interpolation quantiles (type 7) of a nonempty sample.
QuartileRow quartiles(std::vector<double> values);

/// Per-hour nMAE across days (the per-day formula restricted to the hour's
/// slots), summarized as min/Q1/median/Q3/max. Percent.
std::vector<QuartileRow> hourly_error_stats(const Matrix& est, const Matrix& truth, double rating_kw);

/// Same, pooling the hour-of-day errors of several (est, truth, rating) sets.
struct ScoredSet {
  Matrix est;
  Matrix truth;
  double rating_kw = 1.0;
};
std::vector<QuartileRow> hourly_error_stats(std::span<const ScoredSet> sets);

/// max(0, hot - mean(mild)) per hot day.
Matrix benchmark_average_mild(const DailyLoadMatrix& hot, const DailyLoadMatrix& mild);

struct Histogram {
  std::vector<double> edges;  // bins [edges[b], edges[b+1])
  std::vector<int> counts;
  int overflow = 0;           // values >= last edge
};

/// Fixed-width bins over [0, upper); values >= upper land in `overflow`.
Histogram nmae_histogram(std::span<const double> values, double bin_width = 0.05, double upper = 0.5);

/// 99th percentile of the ground-truth HVAC samples, or `fallback_kw` if
/// that is not positive.
double rating_from_truth(const Matrix& truth, double fallback_kw);

struct EvalReport {
  std::string method;
  std::vector<std::string> customers;
  std::vector<double> per_customer_nmae;  // percent
  std::vector<double> per_customer_nee;   // percent
  std::vector<double> rating_kw;
  double mean_nmae = 0.0, std_nmae = 0.0;
  double mean_nee = 0.0, std_nee = 0.0;
  std::vector<QuartileRow> hourly;  // 24 rows, percent
};

/// Scores one method across customers. `names` and `sets` are parallel.
EvalReport evaluate_method(const std::string& method, const std::vector<std::string>& names,
                           std::span<const ScoredSet> sets);

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(std::span<const double> v);

}  // namespace hvacd
